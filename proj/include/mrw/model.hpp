// Mode systems of the generalized Rescorla-Wagner model
//
//   x(k+1) = B_i x(k) + A (r_i - W_i x(k)),   i = i_k,
//
// and the switched affine systems x -> F_i x + c_i they induce, where
// F_i = B_i - A W_i and c_i = A r_i. One joint mode chain carries
// (B_i, W_i, r_i) together.
#ifndef MRW_MODEL_HPP
#define MRW_MODEL_HPP

#include "mrw/chain.hpp"
#include "mrw/core.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mrw {

// Diagonal learning-rate matrix A with 0 <= alpha_i <= 1.
template <typename Scalar = double>
class LearningMatrix {
 public:
  explicit LearningMatrix(Vector<Scalar> alpha) : alpha_(std::move(alpha)) {
    for (Index i = 0; i < alpha_.size(); ++i)
      detail::require(alpha_[i] >= Scalar(0) && alpha_[i] <= Scalar(1),
                      ErrorKind::AlphaOutOfRange,
                      "alpha[" + std::to_string(i) + "] = " +
                          std::to_string(static_cast<double>(alpha_[i])));
  }

  static LearningMatrix constant(Index n, Scalar alpha) {
    return LearningMatrix(Vector<Scalar>::Constant(n, alpha));
  }

  Index size() const noexcept { return alpha_.size(); }
  const Vector<Scalar>& alpha() const noexcept { return alpha_; }
  auto as_diagonal() const { return alpha_.asDiagonal(); }

 private:
  Vector<Scalar> alpha_;
};

namespace detail {

template <typename Scalar>
void require_row_stochastic(const Matrix<Scalar>& m, const char* name) {
  try {
    (void)TransitionMatrix<Scalar>::validate(m);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace detail

template <typename Scalar = double>
struct Mode {
  Matrix<Scalar> b;
  Matrix<Scalar> w;
  Vector<Scalar> r;

  static Mode make(Matrix<Scalar> b, Matrix<Scalar> w, Vector<Scalar> r) {
    detail::require(b.rows() == w.rows() && b.cols() == w.cols() && b.rows() == r.size(),
                    ErrorKind::DimensionMismatch, "mode matrices and stimulus disagree");
    detail::require_row_stochastic(b, "B");
    detail::require_row_stochastic(w, "W");
    return Mode{std::move(b), std::move(w), std::move(r)};
  }

  Index dim() const noexcept { return r.size(); }
};

template <typename Scalar = double>
struct AffineMap {
  Matrix<Scalar> f;
  Vector<Scalar> c;

  Vector<Scalar> operator()(const Vector<Scalar>& x) const { return f * x + c; }
  Index dim() const noexcept { return c.size(); }
};

// F = B - A W; A W scales row i of W by alpha_i.
template <typename Scalar>
Matrix<Scalar> effective_matrix(const Matrix<Scalar>& b, const LearningMatrix<Scalar>& a,
                                const Matrix<Scalar>& w) {
  detail::require(b.rows() == b.cols() && w.rows() == w.cols() && b.rows() == w.rows() &&
                      a.size() == b.rows(),
                  ErrorKind::DimensionMismatch, "effective_matrix operands");
  return b - a.as_diagonal() * w;
}

// Switched affine system: maps w_i(x) = F_i x + c_i selected by a Markov
// chain. This is what dynamics and analysis operate on.
template <typename Scalar = double>
class AffineSystem {
 public:
  AffineSystem(std::vector<AffineMap<Scalar>> maps, TransitionMatrix<Scalar> chain,
               std::optional<Distribution<Scalar>> init_dist = std::nullopt)
      : maps_(std::move(maps)),
        chain_(std::move(chain)),
        init_dist_(init_dist ? std::move(*init_dist) : default_init(chain_)) {
    detail::require(!maps_.empty(), ErrorKind::InvalidArgument, "no modes");
    detail::require(static_cast<Index>(maps_.size()) == chain_.n_states(),
                    ErrorKind::DimensionMismatch, "chain size differs from number of modes");
    detail::require(init_dist_.size() == chain_.n_states(), ErrorKind::DimensionMismatch,
                    "initial mode distribution size");
    const Index n = maps_.front().dim();
    detail::require(n >= 1, ErrorKind::DimensionMismatch, "state dimension must be positive");
    for (const auto& m : maps_)
      detail::require(m.f.rows() == n && m.f.cols() == n && m.c.size() == n,
                      ErrorKind::DimensionMismatch, "affine maps disagree in dimension");
  }

  Index dim() const noexcept { return maps_.front().dim(); }
  Index n_modes() const noexcept { return static_cast<Index>(maps_.size()); }
  const std::vector<AffineMap<Scalar>>& maps() const noexcept { return maps_; }
  const AffineMap<Scalar>& map(Index i) const {
    detail::require(i >= 0 && i < n_modes(), ErrorKind::IndexOutOfRange,
                    "mode index " + std::to_string(i));
    return maps_[static_cast<std::size_t>(i)];
  }
  const TransitionMatrix<Scalar>& chain() const noexcept { return chain_; }
  const Distribution<Scalar>& init_dist() const noexcept { return init_dist_; }

  AffineSystem with_init_dist(Distribution<Scalar> init) const {
    return AffineSystem(maps_, chain_, std::move(init));
  }

 private:
  static Distribution<Scalar> default_init(const TransitionMatrix<Scalar>& chain) {
    if (structural_check(chain).irreducible) return stationary(chain);
    return Distribution<Scalar>::uniform(chain.n_states());
  }

  std::vector<AffineMap<Scalar>> maps_;
  TransitionMatrix<Scalar> chain_;
  Distribution<Scalar> init_dist_;
};

template <typename Scalar = double>
class ModeSystem {
 public:
  // The initial mode distribution defaults to the stationary law of an
  // irreducible chain and to the uniform law otherwise.
  ModeSystem(LearningMatrix<Scalar> a, std::vector<Mode<Scalar>> modes,
             TransitionMatrix<Scalar> chain,
             std::optional<Distribution<Scalar>> init_dist = std::nullopt)
      : a_(std::move(a)), modes_(std::move(modes)), affine_(build(a_, modes_, chain, init_dist)) {}

  Index n_agents() const noexcept { return a_.size(); }
  Index n_modes() const noexcept { return static_cast<Index>(modes_.size()); }
  const LearningMatrix<Scalar>& a() const noexcept { return a_; }
  const std::vector<Mode<Scalar>>& modes() const noexcept { return modes_; }
  const Mode<Scalar>& mode(Index i) const {
    detail::require(i >= 0 && i < n_modes(), ErrorKind::IndexOutOfRange,
                    "mode index " + std::to_string(i));
    return modes_[static_cast<std::size_t>(i)];
  }
  const TransitionMatrix<Scalar>& chain() const noexcept { return affine_.chain(); }
  const Distribution<Scalar>& init_dist() const noexcept { return affine_.init_dist(); }

  // The induced switched affine system.
  const AffineSystem<Scalar>& affine() const noexcept { return affine_; }

 private:
  static AffineSystem<Scalar> build(const LearningMatrix<Scalar>& a,
                                    const std::vector<Mode<Scalar>>& modes,
                                    const TransitionMatrix<Scalar>& chain,
                                    const std::optional<Distribution<Scalar>>& init) {
    detail::require(!modes.empty(), ErrorKind::InvalidArgument, "no modes");
    std::vector<AffineMap<Scalar>> maps;
    maps.reserve(modes.size());
    for (const auto& m : modes) {
      detail::require(m.dim() == a.size(), ErrorKind::DimensionMismatch,
                      "mode dimension differs from learning matrix");
      maps.push_back({effective_matrix(m.b, a, m.w), a.as_diagonal() * m.r});
    }
    return AffineSystem<Scalar>(std::move(maps), chain, init);
  }

  LearningMatrix<Scalar> a_;
  std::vector<Mode<Scalar>> modes_;
  AffineSystem<Scalar> affine_;
};

// w_i(x) = F_i x + A r_i.
template <typename Scalar>
const AffineMap<Scalar>& affine_map(const ModeSystem<Scalar>& sys, Index mode_index) {
  return sys.affine().map(mode_index);
}

namespace detail {

template <typename Scalar>
TransitionMatrix<Scalar> uniform_iid(Index n) {
  return TransitionMatrix<Scalar>::iid(Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
}

}  // namespace detail

// Classical multi-stimulus model: B = I, W = (1/n) 11^T, one mode per
// stimulus level, with r broadcast as level * 1. The level chain defaults to
// i.i.d. uniform.
template <typename Scalar>
ModeSystem<Scalar> classical_rw(Index n, Scalar alpha, const std::vector<Scalar>& levels,
                                std::optional<TransitionMatrix<Scalar>> chain = std::nullopt) {
  detail::require(n >= 1, ErrorKind::DimensionMismatch, "n must be positive");
  detail::require(!levels.empty(), ErrorKind::InvalidArgument, "no stimulus levels");
  detail::require(alpha >= Scalar(0) && alpha <= Scalar(1), ErrorKind::AlphaOutOfRange,
                  "alpha = " + std::to_string(static_cast<double>(alpha)));
  const Matrix<Scalar> identity = Matrix<Scalar>::Identity(n, n);
  const Matrix<Scalar> averaging = Matrix<Scalar>::Constant(n, n, Scalar(1) / Scalar(n));
  std::vector<Mode<Scalar>> modes;
  for (Scalar level : levels)
    modes.push_back(Mode<Scalar>::make(identity, averaging, Vector<Scalar>::Constant(n, level)));
  auto p = chain ? *chain : detail::uniform_iid<Scalar>(static_cast<Index>(levels.size()));
  return ModeSystem<Scalar>(LearningMatrix<Scalar>::constant(n, alpha), std::move(modes),
                            std::move(p));
}

// Decoupled agents: B = W = I, so F = I - A. Levels default to {0, 1}
// (extinction, acquisition).
template <typename Scalar>
ModeSystem<Scalar> epstein(const Vector<Scalar>& alpha, const std::vector<Scalar>& levels = {0, 1},
                           std::optional<TransitionMatrix<Scalar>> chain = std::nullopt) {
  const Index n = alpha.size();
  detail::require(n >= 1, ErrorKind::DimensionMismatch, "alpha must be nonempty");
  detail::require(!levels.empty(), ErrorKind::InvalidArgument, "no stimulus levels");
  LearningMatrix<Scalar> a(alpha);
  const Matrix<Scalar> identity = Matrix<Scalar>::Identity(n, n);
  std::vector<Mode<Scalar>> modes;
  for (Scalar level : levels)
    modes.push_back(Mode<Scalar>::make(identity, identity, Vector<Scalar>::Constant(n, level)));
  auto p = chain ? *chain : detail::uniform_iid<Scalar>(static_cast<Index>(levels.size()));
  return ModeSystem<Scalar>(std::move(a), std::move(modes), std::move(p));
}

// Friedkin-Johnsen x(k+1) = Lambda W x(k) + (I - Lambda) u as one mode with
// A = I - Lambda, B = W and r = u.
template <typename Scalar>
ModeSystem<Scalar> friedkin_johnsen(const Matrix<Scalar>& w, const Vector<Scalar>& lambda,
                                    const Vector<Scalar>& u) {
  detail::require(w.rows() == lambda.size() && u.size() == lambda.size(),
                  ErrorKind::DimensionMismatch, "friedkin_johnsen operands");
  for (Index i = 0; i < lambda.size(); ++i)
    detail::require(lambda[i] >= Scalar(0) && lambda[i] <= Scalar(1), ErrorKind::AlphaOutOfRange,
                    "lambda[" + std::to_string(i) + "]");
  std::vector<Mode<Scalar>> modes{Mode<Scalar>::make(w, w, u)};
  return ModeSystem<Scalar>(LearningMatrix<Scalar>(Vector<Scalar>::Ones(lambda.size()) - lambda),
                            std::move(modes),
                            TransitionMatrix<Scalar>::validate(Matrix<Scalar>::Ones(1, 1)));
}

// Illustrative attraction / neglect / repulsion gossip model with A = 0 and
// no stimulus, so each mode is the pure topology step x -> B x:
//   attraction  B = W_avg
//   neglect     B = I
//   repulsion   B = (1 + beta) I - beta W_avg, with beta reduced to the largest
//               value keeping every row nonnegative.
// Events are drawn i.i.d. with the given probabilities. Not a port of any
// particular published parametrization.
template <typename Scalar>
ModeSystem<Scalar> attract_neglect_repulse(const Matrix<Scalar>& w_avg,
                                           const Vector<Scalar>& probabilities,
                                           Scalar beta = Scalar(0.5)) {
  detail::require(probabilities.size() == 3, ErrorKind::InvalidArgument,
                  "expected three event probabilities");
  for (Index i = 0; i < 3; ++i)
    detail::require(probabilities[i] >= Scalar(0), ErrorKind::ProbabilitySumViolation,
                    "negative event probability");
  detail::require(std::abs(static_cast<double>(probabilities.sum()) - 1.0) <= kStochasticTolerance,
                  ErrorKind::ProbabilitySumViolation, "event probabilities must sum to 1");
  detail::require(beta >= Scalar(0), ErrorKind::InvalidArgument, "beta must be nonnegative");
  detail::require_row_stochastic(w_avg, "W_avg");
  const Index n = w_avg.rows();
  const Matrix<Scalar> identity = Matrix<Scalar>::Identity(n, n);

  Scalar beta_eff = beta;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && w_avg(i, j) > Scalar(0)) beta_eff = Scalar(0);
  Matrix<Scalar> repulsion = (Scalar(1) + beta_eff) * identity - beta_eff * w_avg;

  const Vector<Scalar> zero = Vector<Scalar>::Zero(n);
  std::vector<Mode<Scalar>> modes{Mode<Scalar>::make(w_avg, identity, zero),
                                  Mode<Scalar>::make(identity, identity, zero),
                                  Mode<Scalar>::make(repulsion, identity, zero)};
  return ModeSystem<Scalar>(LearningMatrix<Scalar>::constant(n, Scalar(0)), std::move(modes),
                            TransitionMatrix<Scalar>::iid(probabilities));
}

// Joint (mode, stimulus) system for independent topology and stimulus chains:
// joint state (i, s) has index i * S + s, carries (B_i, W_i, levels[s] * 1),
// and moves with p_{ii'} p_{ss'}.
template <typename Scalar>
ModeSystem<Scalar> with_independent_stimulus(const LearningMatrix<Scalar>& a,
                                             const std::vector<std::pair<Matrix<Scalar>, Matrix<Scalar>>>& topologies,
                                             const TransitionMatrix<Scalar>& topology_chain,
                                             const std::vector<Scalar>& levels,
                                             const TransitionMatrix<Scalar>& stimulus_chain) {
  detail::require(static_cast<Index>(topologies.size()) == topology_chain.n_states() &&
                      static_cast<Index>(levels.size()) == stimulus_chain.n_states(),
                  ErrorKind::DimensionMismatch, "chains disagree with mode lists");
  std::vector<Mode<Scalar>> modes;
  for (const auto& [b, w] : topologies)
    for (Scalar level : levels)
      modes.push_back(Mode<Scalar>::make(b, w, Vector<Scalar>::Constant(a.size(), level)));
  return ModeSystem<Scalar>(a, std::move(modes), product_chain(topology_chain, stimulus_chain));
}

}  // namespace mrw

#endif  // MRW_MODEL_HPP
