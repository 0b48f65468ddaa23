// Finite-state Markov chains: validation, structure, stationary law, time
// reversal, path probabilities and seeded sampling.
//
// States are indexed 0..N-1. All types are immutable after construction.
#ifndef MRW_CHAIN_HPP
#define MRW_CHAIN_HPP

#include "mrw/core.hpp"
#include "mrw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace mrw {

template <typename Scalar = double>
class TransitionMatrix {
 public:
  using MatrixType = Matrix<Scalar>;

  // Checks squareness, nonnegativity and unit row sums to within
  // kStochasticTolerance. Accepted entries are stored unchanged so documents
  // round-trip bit for bit.
  static TransitionMatrix validate(const MatrixType& p) {
    detail::require(p.rows() == p.cols(), ErrorKind::NonSquare,
                    "transition matrix is " + std::to_string(p.rows()) + "x" +
                        std::to_string(p.cols()));
    detail::require(p.rows() >= 1, ErrorKind::NonSquare, "transition matrix is empty");
    for (Index i = 0; i < p.rows(); ++i) {
      for (Index j = 0; j < p.cols(); ++j) {
        detail::require(std::isfinite(static_cast<double>(p(i, j))) && p(i, j) >= Scalar(0),
                        ErrorKind::NegativeEntry,
                        "entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
        detail::require(p(i, j) <= Scalar(1), ErrorKind::RowSumViolation,
                        "entry (" + std::to_string(i) + "," + std::to_string(j) + ") exceeds 1");
      }
      const Scalar row_sum = p.row(i).sum();
      detail::require(std::abs(static_cast<double>(row_sum) - 1.0) <= kStochasticTolerance,
                      ErrorKind::RowSumViolation, "row " + std::to_string(i) + " sums to " +
                                                      std::to_string(static_cast<double>(row_sum)));
    }
    return TransitionMatrix(p);
  }

  // Chain whose every row is `row` (i.i.d. selection).
  static TransitionMatrix iid(const Vector<Scalar>& row) {
    MatrixType p(row.size(), row.size());
    for (Index i = 0; i < row.size(); ++i) p.row(i) = row.transpose();
    return validate(p);
  }

  Index n_states() const noexcept { return p_.rows(); }
  const MatrixType& p() const noexcept { return p_; }
  Scalar operator()(Index i, Index j) const { return p_(i, j); }

 private:
  explicit TransitionMatrix(MatrixType p) : p_(std::move(p)) {}

  MatrixType p_;
};

template <typename Scalar = double>
class Distribution {
 public:
  using VectorType = Vector<Scalar>;

  static Distribution validate(const VectorType& weights) {
    detail::require(weights.size() >= 1, ErrorKind::InvalidArgument, "empty distribution");
    for (Index i = 0; i < weights.size(); ++i) {
      detail::require(std::isfinite(static_cast<double>(weights[i])) && weights[i] >= Scalar(0),
                      ErrorKind::NegativeEntry, "distribution weight " + std::to_string(i));
    }
    const Scalar total = weights.sum();
    detail::require(std::abs(static_cast<double>(total) - 1.0) <= kStochasticTolerance,
                    ErrorKind::ProbabilitySumViolation,
                    "distribution sums to " + std::to_string(static_cast<double>(total)));
    return Distribution(weights);
  }

  static Distribution uniform(Index n) {
    return Distribution(VectorType::Constant(n, Scalar(1) / Scalar(n)));
  }

  static Distribution point_mass(Index n, Index i) {
    detail::require(i >= 0 && i < n, ErrorKind::IndexOutOfRange, "point mass index");
    VectorType w = VectorType::Zero(n);
    w[i] = Scalar(1);
    return Distribution(std::move(w));
  }

  Index size() const noexcept { return weights_.size(); }
  const VectorType& weights() const noexcept { return weights_; }
  Scalar operator[](Index i) const { return weights_[i]; }

 private:
  explicit Distribution(VectorType w) : weights_(std::move(w)) {}

  VectorType weights_;
};

// Finite prefix (i_0, i_1, ...) of a realization of the chain.
struct ModePath {
  std::vector<Index> indices;
  std::optional<std::uint64_t> seed;

  std::size_t size() const noexcept { return indices.size(); }
  Index operator[](std::size_t t) const { return indices[t]; }
  friend bool operator==(const ModePath&, const ModePath&) = default;
};

struct ChainStructure {
  bool irreducible = false;
  bool aperiodic = false;
};

namespace detail {

template <typename Scalar>
std::vector<std::vector<Index>> positivity_graph(const Matrix<Scalar>& p) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(p.rows()));
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > Scalar(0)) adj[static_cast<std::size_t>(i)].push_back(j);
  return adj;
}

// Tarjan's algorithm; returns the component id of every vertex.
inline std::vector<Index> strong_components(const std::vector<std::vector<Index>>& adj,
                                            Index& n_components) {
  const auto n = static_cast<Index>(adj.size());
  std::vector<Index> index(adj.size(), -1), low(adj.size(), 0), comp(adj.size(), -1);
  std::vector<bool> on_stack(adj.size(), false);
  std::vector<Index> stack;
  Index counter = 0;
  n_components = 0;

  struct Frame {
    Index v;
    std::size_t next;
  };
  for (Index root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto& out = adj[static_cast<std::size_t>(f.v)];
      if (f.next < out.size()) {
        const Index w = out[f.next++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const Index v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        Index w = -1;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = n_components;
        } while (w != v);
        ++n_components;
      }
    }
  }
  return comp;
}

}  // namespace detail

// Irreducibility is strong connectivity of the positivity graph. A state's
// period is the gcd of (level[u] + 1 - level[v]) over edges u->v inside its
// strong component, with BFS levels from one vertex of that component. States
// on no cycle have no period and are ignored by the aperiodicity test.
template <typename Scalar>
ChainStructure structural_check(const TransitionMatrix<Scalar>& chain) {
  const auto adj = detail::positivity_graph(chain.p());
  Index n_components = 0;
  const auto comp = detail::strong_components(adj, n_components);
  ChainStructure out;
  out.irreducible = (n_components == 1);
  out.aperiodic = true;

  const auto n = static_cast<std::size_t>(chain.n_states());
  std::vector<Index> level(n, -1);
  for (Index c = 0; c < n_components; ++c) {
    const auto root = static_cast<std::size_t>(
        std::find(comp.begin(), comp.end(), c) - comp.begin());
    std::queue<std::size_t> frontier;
    level[root] = 0;
    frontier.push(root);
    Index period = 0;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (Index v : adj[u]) {
        if (comp[static_cast<std::size_t>(v)] != c) continue;
        auto& lv = level[static_cast<std::size_t>(v)];
        if (lv < 0) {
          lv = level[u] + 1;
          frontier.push(static_cast<std::size_t>(v));
        } else {
          period = std::gcd(period, std::abs(level[u] + 1 - lv));
        }
      }
    }
    // period == 0 means the component carries no cycle.
    if (period > 1) out.aperiodic = false;
  }
  return out;
}

// Solves (P^T - I) m = 0 with the last equation replaced by sum(m) = 1.
template <typename Scalar>
Distribution<Scalar> stationary(const TransitionMatrix<Scalar>& chain) {
  detail::require(structural_check(chain).irreducible, ErrorKind::NotIrreducible,
                  "stationary distribution is not unique");
  const Index n = chain.n_states();
  Matrix<Scalar> system = chain.p().transpose() - Matrix<Scalar>::Identity(n, n);
  system.row(n - 1).setOnes();
  Vector<Scalar> rhs = Vector<Scalar>::Zero(n);
  rhs[n - 1] = Scalar(1);
  Vector<Scalar> m = system.fullPivLu().solve(rhs);
  m = m.cwiseMax(Scalar(0));
  m /= m.sum();
  return Distribution<Scalar>::validate(m);
}

// Time-reversed chain q_ij = m_j p_ji / m_i.
template <typename Scalar>
TransitionMatrix<Scalar> reverse(const TransitionMatrix<Scalar>& chain,
                                 const Distribution<Scalar>& m) {
  const Index n = chain.n_states();
  detail::require(m.size() == n, ErrorKind::DimensionMismatch, "distribution size");
  for (Index i = 0; i < n; ++i)
    detail::require(m[i] > Scalar(0), ErrorKind::ZeroMass,
                    "state " + std::to_string(i) + " has zero stationary mass");
  const Vector<Scalar> drift = chain.p().transpose() * m.weights() - m.weights();
  detail::require(drift.template lpNorm<Eigen::Infinity>() <= Scalar(1e-10),
                  ErrorKind::NotStationary, "distribution is not stationary for the chain");
  Matrix<Scalar> q(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) q(i, j) = m[j] * chain(j, i) / m[i];
  return TransitionMatrix<Scalar>::validate(q);
}

namespace detail {

template <typename Scalar>
void check_path(const TransitionMatrix<Scalar>& chain, const ModePath& path) {
  for (Index i : path.indices)
    require(i >= 0 && i < chain.n_states(), ErrorKind::IndexOutOfRange,
            "path index " + std::to_string(i));
}

}  // namespace detail

template <typename Scalar>
Scalar path_probability(const TransitionMatrix<Scalar>& chain, const Distribution<Scalar>& init,
                        const ModePath& path) {
  detail::check_path(chain, path);
  if (path.indices.empty()) return Scalar(1);
  Scalar prob = init[path[0]];
  for (std::size_t t = 1; t < path.size(); ++t) prob *= chain(path[t - 1], path[t]);
  return prob;
}

// Marginal law of the chain after k steps: init^T P^k.
template <typename Scalar>
Distribution<Scalar> distribution_at(const TransitionMatrix<Scalar>& chain,
                                     const Distribution<Scalar>& init, std::uint64_t k) {
  detail::require(init.size() == chain.n_states(), ErrorKind::DimensionMismatch,
                  "distribution size");
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row = init.weights().transpose();
  Matrix<Scalar> power = chain.p();
  // Binary powering keeps large k cheap.
  for (std::uint64_t e = k; e > 0; e >>= 1) {
    if (e & 1U) row = row * power;
    if (e > 1) power = power * power;
  }
  Vector<Scalar> w = row.transpose().cwiseMax(Scalar(0));
  return Distribution<Scalar>::validate(w / w.sum());
}

template <typename Scalar>
ModePath sample_path(const TransitionMatrix<Scalar>& chain, const Distribution<Scalar>& init,
                     std::size_t horizon, Rng& rng) {
  detail::require(init.size() == chain.n_states(), ErrorKind::DimensionMismatch,
                  "distribution size");
  ModePath path;
  path.indices.reserve(horizon + 1);
  Index state = rng.categorical(init.weights());
  path.indices.push_back(state);
  for (std::size_t t = 0; t < horizon; ++t) {
    state = rng.categorical(chain.p().row(state));
    path.indices.push_back(state);
  }
  return path;
}

// Path of length horizon + 1 drawn from stream 0 of `seed`.
template <typename Scalar>
ModePath sample_path(const TransitionMatrix<Scalar>& chain, const Distribution<Scalar>& init,
                     std::size_t horizon, std::uint64_t seed) {
  Rng rng(seed);
  ModePath path = sample_path(chain, init, horizon, rng);
  path.seed = seed;
  return path;
}

// Joint chain of two independent chains; state (i, r) has index i * R + r.
template <typename Scalar>
TransitionMatrix<Scalar> product_chain(const TransitionMatrix<Scalar>& first,
                                       const TransitionMatrix<Scalar>& second) {
  const Index a = first.n_states(), b = second.n_states();
  Matrix<Scalar> p(a * b, a * b);
  for (Index i = 0; i < a; ++i)
    for (Index j = 0; j < a; ++j) p.block(i * b, j * b, b, b) = first(i, j) * second.p();
  return TransitionMatrix<Scalar>::validate(p);
}

}  // namespace mrw

#endif  // MRW_CHAIN_HPP
