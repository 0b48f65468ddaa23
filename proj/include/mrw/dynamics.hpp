// Forward random walk Z_k = w_{i_k}(Z_{k-1}), the backward process
// w_{i_1} o ... o w_{i_k}(Z_0), and the closed-form unrolled evaluation.
//
// Path alignment: a trajectory of horizon K carries modes (i_0, ..., i_K) and
// states (Z_0, ..., Z_K); state k >= 1 is produced by the map of mode i_k.
// Mode i_0 only seeds the chain.
#ifndef MRW_DYNAMICS_HPP
#define MRW_DYNAMICS_HPP

#include "mrw/chain.hpp"
#include "mrw/core.hpp"
#include "mrw/model.hpp"
#include "mrw/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace mrw {

// Law of Z_0 on R^n.
template <typename Scalar = double>
class InitialLaw {
 public:
  struct Point {
    Vector<Scalar> x0;
  };
  // Independent normal coordinates; zero deviation gives a point mass.
  struct Gaussian {
    Vector<Scalar> mean;
    Vector<Scalar> stddev;
  };
  // Uniform choice among the listed vectors.
  struct Samples {
    std::vector<Vector<Scalar>> values;
  };

  static InitialLaw point(Vector<Scalar> x0) { return InitialLaw(Point{std::move(x0)}); }

  static InitialLaw gaussian(Vector<Scalar> mean, Vector<Scalar> stddev) {
    detail::require(mean.size() == stddev.size(), ErrorKind::DimensionMismatch,
                    "gaussian mean and stddev");
    detail::require((stddev.array() >= Scalar(0)).all(), ErrorKind::InvalidArgument,
                    "negative stddev");
    return InitialLaw(Gaussian{std::move(mean), std::move(stddev)});
  }

  static InitialLaw samples(std::vector<Vector<Scalar>> values) {
    detail::require(!values.empty(), ErrorKind::EmptySample, "initial sample list is empty");
    for (const auto& v : values)
      detail::require(v.size() == values.front().size(), ErrorKind::DimensionMismatch,
                      "initial samples disagree in dimension");
    return InitialLaw(Samples{std::move(values)});
  }

  Index dim() const {
    return std::visit(
        [](const auto& law) -> Index {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, Point>) return law.x0.size();
          else if constexpr (std::is_same_v<T, Gaussian>) return law.mean.size();
          else return law.values.front().size();
        },
        law_);
  }

  // Point masses consume no randomness.
  Vector<Scalar> draw(Rng& rng) const {
    return std::visit(
        [&rng](const auto& law) -> Vector<Scalar> {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, Point>) {
            return law.x0;
          } else if constexpr (std::is_same_v<T, Gaussian>) {
            Vector<Scalar> x(law.mean.size());
            for (Index i = 0; i < x.size(); ++i)
              x[i] = law.mean[i] + law.stddev[i] * static_cast<Scalar>(rng.normal());
            return x;
          } else {
            const auto n = law.values.size();
            auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            return law.values[std::min(pick, n - 1)];
          }
        },
        law_);
  }

  const auto& law() const noexcept { return law_; }

 private:
  using Variant = std::variant<Point, Gaussian, Samples>;
  explicit InitialLaw(Variant v) : law_(std::move(v)) {}
  Variant law_;
};

enum class Direction { forward, backward };

// Default storage cap in scalars (states only).
inline constexpr std::size_t kDefaultStateCap = 1'000'000;

template <typename Scalar = double>
struct Trajectory {
  // Stored prefix of the states; complete unless `truncated`.
  std::vector<Vector<Scalar>> states;
  // Stored prefix of the mode path, aligned with `states`.
  ModePath mode_path;
  std::optional<std::uint64_t> seed;
  Direction direction = Direction::forward;

  // Running statistics over the whole horizon, kept even when truncated.
  std::size_t horizon = 0;
  Vector<Scalar> final_state;
  Vector<Scalar> state_sum;
  bool truncated = false;

  Index dim() const noexcept { return final_state.size(); }
};

// One step of the model in its native form B x + A (r - W x).
template <typename Scalar>
Vector<Scalar> forward_step(const Vector<Scalar>& x, const Mode<Scalar>& mode,
                            const LearningMatrix<Scalar>& a) {
  detail::require(x.size() == mode.dim() && a.size() == mode.dim(), ErrorKind::DimensionMismatch,
                  "forward_step operands");
  return mode.b * x + a.as_diagonal() * (mode.r - mode.w * x);
}

namespace detail {

template <typename Scalar>
class TrajectoryRecorder {
 public:
  TrajectoryRecorder(Trajectory<Scalar>& out, std::size_t horizon, std::size_t cap)
      : out_(out) {
    const auto n = static_cast<std::size_t>(std::max<Index>(1, out.final_state.size()));
    max_states_ = std::max<std::size_t>(1, cap / n);
    out_.horizon = horizon;
    out_.truncated = (horizon + 1 > max_states_);
    out_.states.reserve(std::min(horizon + 1, max_states_));
    out_.mode_path.indices.reserve(std::min(horizon + 1, max_states_));
  }

  void record(Index mode, const Vector<Scalar>& x) {
    if (out_.states.size() < max_states_) {
      out_.states.push_back(x);
      out_.mode_path.indices.push_back(mode);
    }
    out_.state_sum += x;
    out_.final_state = x;
  }

 private:
  Trajectory<Scalar>& out_;
  std::size_t max_states_ = 0;
};

}  // namespace detail

// Streams the forward walk to `visit(k, mode, state)` for k = 0..horizon.
// Randomness: Z_0 is drawn first, then the mode path, all from `rng`.
template <typename Scalar, typename Visitor>
void simulate_forward(const AffineSystem<Scalar>& sys, const InitialLaw<Scalar>& init,
                      std::size_t horizon, Rng& rng, Visitor&& visit) {
  detail::require(init.dim() == sys.dim(), ErrorKind::DimensionMismatch,
                  "initial law dimension");
  Vector<Scalar> x = init.draw(rng);
  Index mode = rng.categorical(sys.init_dist().weights());
  visit(std::size_t{0}, mode, static_cast<const Vector<Scalar>&>(x));
  const auto& p = sys.chain().p();
  Vector<Scalar> next(x.size());
  for (std::size_t k = 1; k <= horizon; ++k) {
    mode = rng.categorical(p.row(mode));
    const auto& w = sys.maps()[static_cast<std::size_t>(mode)];
    next.noalias() = w.f * x;
    next += w.c;
    x.swap(next);
    visit(k, mode, static_cast<const Vector<Scalar>&>(x));
  }
}

template <typename Scalar>
Trajectory<Scalar> forward_trajectory(const AffineSystem<Scalar>& sys,
                                      const InitialLaw<Scalar>& init, std::size_t horizon,
                                      Rng& rng, std::size_t cap = kDefaultStateCap) {
  Trajectory<Scalar> out;
  out.direction = Direction::forward;
  out.final_state = Vector<Scalar>::Zero(sys.dim());
  out.state_sum = Vector<Scalar>::Zero(sys.dim());
  detail::TrajectoryRecorder<Scalar> recorder(out, horizon, cap);
  simulate_forward(sys, init, horizon, rng,
                   [&](std::size_t, Index mode, const Vector<Scalar>& x) {
                     recorder.record(mode, x);
                   });
  return out;
}

// Trajectory from stream 0 of `seed`; identical inputs give bitwise identical
// output.
template <typename Scalar>
Trajectory<Scalar> forward_trajectory(const AffineSystem<Scalar>& sys,
                                      const InitialLaw<Scalar>& init, std::size_t horizon,
                                      std::uint64_t seed, std::size_t cap = kDefaultStateCap) {
  Rng rng(seed);
  auto out = forward_trajectory(sys, init, horizon, rng, cap);
  out.seed = seed;
  out.mode_path.seed = seed;
  return out;
}

template <typename Scalar>
Trajectory<Scalar> forward_trajectory(const ModeSystem<Scalar>& sys,
                                      const InitialLaw<Scalar>& init, std::size_t horizon,
                                      std::uint64_t seed, std::size_t cap = kDefaultStateCap) {
  return forward_trajectory(sys.affine(), init, horizon, seed, cap);
}

// Backward process along a given path: state k is w_{i_1} o ... o w_{i_k}(x0),
// the newest map innermost. Maintains M_k = F_{i_1}...F_{i_k} and the offset
// c_k = w_{i_1} o ... o w_{i_k}(0), so each extension costs one product.
template <typename Scalar>
Trajectory<Scalar> backward_trajectory(const AffineSystem<Scalar>& sys, const Vector<Scalar>& x0,
                                       const ModePath& path,
                                       std::size_t cap = kDefaultStateCap) {
  detail::require(x0.size() == sys.dim(), ErrorKind::DimensionMismatch, "x0 dimension");
  detail::require(!path.indices.empty(), ErrorKind::InvalidArgument, "empty mode path");
  detail::check_path(sys.chain(), path);
  const Index n = sys.dim();
  Trajectory<Scalar> out;
  out.direction = Direction::backward;
  out.seed = path.seed;
  out.mode_path.seed = path.seed;
  out.final_state = Vector<Scalar>::Zero(n);
  out.state_sum = Vector<Scalar>::Zero(n);
  const std::size_t horizon = path.size() - 1;
  detail::TrajectoryRecorder<Scalar> recorder(out, horizon, cap);

  Matrix<Scalar> product = Matrix<Scalar>::Identity(n, n);
  Vector<Scalar> offset = Vector<Scalar>::Zero(n);
  recorder.record(path[0], x0);
  for (std::size_t k = 1; k <= horizon; ++k) {
    const auto& w = sys.maps()[static_cast<std::size_t>(path[k])];
    offset += product * w.c;
    product = product * w.f;
    recorder.record(path[k], product * x0 + offset);
  }
  return out;
}

template <typename Scalar>
Trajectory<Scalar> backward_trajectory(const ModeSystem<Scalar>& sys, const Vector<Scalar>& x0,
                                       const ModePath& path,
                                       std::size_t cap = kDefaultStateCap) {
  return backward_trajectory(sys.affine(), x0, path, cap);
}

// Backward trajectory along a path drawn from the time-reversed chain started
// at its stationary law (which is also the stationary law of the chain).
template <typename Scalar>
Trajectory<Scalar> sample_backward_trajectory(const AffineSystem<Scalar>& sys,
                                              const Vector<Scalar>& x0, std::size_t horizon,
                                              Rng& rng, std::size_t cap = kDefaultStateCap) {
  const auto m = stationary(sys.chain());
  const auto q = reverse(sys.chain(), m);
  return backward_trajectory(sys, x0, sample_path(q, m, horizon, rng), cap);
}

template <typename Scalar>
Trajectory<Scalar> sample_backward_trajectory(const AffineSystem<Scalar>& sys,
                                              const Vector<Scalar>& x0, std::size_t horizon,
                                              std::uint64_t seed,
                                              std::size_t cap = kDefaultStateCap) {
  Rng rng(seed);
  auto out = sample_backward_trajectory(sys, x0, horizon, rng, cap);
  out.seed = seed;
  out.mode_path.seed = seed;
  return out;
}

// Closed form of the forward walk at the end of the path:
//   Z_k = F_{i_k}...F_{i_1} Z_0 + sum_{l=1..k} F_{i_k}...F_{i_{l+1}} A r(l),
// with r(l) the stimulus of mode i_l. Each product is formed explicitly.
template <typename Scalar>
Vector<Scalar> unrolled_forward(const AffineSystem<Scalar>& sys, const Vector<Scalar>& x0,
                                const ModePath& path) {
  detail::require(x0.size() == sys.dim(), ErrorKind::DimensionMismatch, "x0 dimension");
  detail::require(!path.indices.empty(), ErrorKind::InvalidArgument, "empty mode path");
  detail::check_path(sys.chain(), path);
  const Index n = sys.dim();
  const std::size_t k = path.size() - 1;
  auto product_from = [&](std::size_t first) {
    Matrix<Scalar> prod = Matrix<Scalar>::Identity(n, n);
    for (std::size_t t = first; t <= k; ++t)
      prod = sys.maps()[static_cast<std::size_t>(path[t])].f * prod;
    return prod;
  };
  Vector<Scalar> z = product_from(1) * x0;
  for (std::size_t l = 1; l <= k; ++l)
    z += product_from(l + 1) * sys.maps()[static_cast<std::size_t>(path[l])].c;
  return z;
}

template <typename Scalar>
Vector<Scalar> unrolled_forward(const ModeSystem<Scalar>& sys, const Vector<Scalar>& x0,
                                const ModePath& path) {
  return unrolled_forward(sys.affine(), x0, path);
}

namespace detail {

// Runs job(j) for j in [0, count) on up to hardware_concurrency threads.
// Each job writes only its own slot, so results never depend on scheduling.
template <typename Job>
void parallel_for(std::size_t count, Job&& job) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1U, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t j = 0; j < count; ++j) job(j);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t j = w; j < count; j += workers) job(j);
    });
}

}  // namespace detail

// Trajectory j uses stream j of `base_seed`, so trajectory 0 equals
// forward_trajectory(sys, init, horizon, base_seed).
template <typename Scalar>
std::vector<Trajectory<Scalar>> batch_trajectories(const AffineSystem<Scalar>& sys,
                                                   const InitialLaw<Scalar>& init,
                                                   std::size_t horizon, std::size_t n_traj,
                                                   std::uint64_t base_seed,
                                                   std::size_t cap = kDefaultStateCap) {
  detail::require(n_traj >= 1, ErrorKind::InvalidArgument, "n_traj must be at least 1");
  std::vector<Trajectory<Scalar>> out(n_traj);
  detail::parallel_for(n_traj, [&](std::size_t j) {
    Rng rng(base_seed, j);
    out[j] = forward_trajectory(sys, init, horizon, rng, cap);
    out[j].seed = base_seed;
    out[j].mode_path.seed = base_seed;
  });
  return out;
}

template <typename Scalar>
std::vector<Trajectory<Scalar>> batch_trajectories(const ModeSystem<Scalar>& sys,
                                                   const InitialLaw<Scalar>& init,
                                                   std::size_t horizon, std::size_t n_traj,
                                                   std::uint64_t base_seed,
                                                   std::size_t cap = kDefaultStateCap) {
  return batch_trajectories(sys.affine(), init, horizon, n_traj, base_seed, cap);
}

// States of n_traj independent forward walks at each requested time, without
// storing whole trajectories. result[s][j] is trajectory j at snapshots[s].
// Trajectory j uses stream (stream_offset + j) of `seed`.
template <typename Scalar>
std::vector<std::vector<Vector<Scalar>>> batch_snapshots(const AffineSystem<Scalar>& sys,
                                                         const InitialLaw<Scalar>& init,
                                                         const std::vector<std::size_t>& snapshots,
                                                         std::size_t n_traj, std::uint64_t seed,
                                                         std::uint64_t stream_offset = 0) {
  detail::require(n_traj >= 1, ErrorKind::InvalidArgument, "n_traj must be at least 1");
  detail::require(!snapshots.empty(), ErrorKind::InvalidArgument, "no snapshot times");
  const std::size_t horizon = *std::max_element(snapshots.begin(), snapshots.end());
  std::vector<std::vector<Vector<Scalar>>> out(snapshots.size(),
                                               std::vector<Vector<Scalar>>(n_traj));
  detail::parallel_for(n_traj, [&](std::size_t j) {
    Rng rng(seed, stream_offset + j);
    simulate_forward(sys, init, horizon, rng,
                     [&](std::size_t k, Index, const Vector<Scalar>& x) {
                       for (std::size_t s = 0; s < snapshots.size(); ++s)
                         if (snapshots[s] == k) out[s][j] = x;
                     });
  });
  return out;
}

// Backward states at time `horizon` for n_traj paths drawn from the reversed
// chain. Path j uses stream j of `seed`, which first draws Z_0 from `init`.
// With a point mass the law is discrete and atoms reached along different
// composition orders may differ in the last bit.
template <typename Scalar>
std::vector<Vector<Scalar>> batch_backward_finals(const AffineSystem<Scalar>& sys,
                                                  const InitialLaw<Scalar>& init,
                                                  std::size_t horizon, std::size_t n_traj,
                                                  std::uint64_t seed) {
  detail::require(n_traj >= 1, ErrorKind::InvalidArgument, "n_traj must be at least 1");
  detail::require(init.dim() == sys.dim(), ErrorKind::DimensionMismatch, "initial law dimension");
  const auto m = stationary(sys.chain());
  const auto q = reverse(sys.chain(), m);
  std::vector<Vector<Scalar>> out(n_traj);
  detail::parallel_for(n_traj, [&](std::size_t j) {
    Rng rng(seed, j);
    const Vector<Scalar> x0 = init.draw(rng);
    out[j] = backward_trajectory(sys, x0, sample_path(q, m, horizon, rng), 0).final_state;
  });
  return out;
}

template <typename Scalar>
std::vector<Vector<Scalar>> batch_backward_finals(const AffineSystem<Scalar>& sys,
                                                  const Vector<Scalar>& x0, std::size_t horizon,
                                                  std::size_t n_traj, std::uint64_t seed) {
  return batch_backward_finals(sys, InitialLaw<Scalar>::point(x0), horizon, n_traj, seed);
}

// CSV with header k,mode,x_1,...,x_n and 17 significant digits. Only the
// stored prefix of a truncated trajectory is written.
template <typename Scalar>
void write_trajectory_csv(std::ostream& os, const Trajectory<Scalar>& traj) {
  os << "k,mode";
  for (Index i = 0; i < traj.dim(); ++i) os << ",x_" << (i + 1);
  os << '\n';
  char buf[40];
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << k << ',' << traj.mode_path[k];
    for (Index i = 0; i < traj.states[k].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(traj.states[k][i]));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace mrw

#endif  // MRW_DYNAMICS_HPP
