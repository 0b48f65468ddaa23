// Stability and ergodicity analysis of switched affine systems:
//
//  * expected log-norm E_P log||F_{i_k}...F_{i_1}|| with i_1 ~ m (exact
//    enumeration and Monte Carlo) and the search for a k making it negative,
//  * spectral radius / Schur checks,
//  * the top Lyapunov exponent lim (1/n) log||F_{i_n}...F_{i_1}||,
//  * first and second stationary moments from the moment closure,
//  * ergodic time averages, two-sample KS distances and the
//    initial-distribution experiment built on them.
#ifndef MRW_ANALYSIS_HPP
#define MRW_ANALYSIS_HPP

#include "mrw/chain.hpp"
#include "mrw/core.hpp"
#include "mrw/dynamics.hpp"
#include "mrw/model.hpp"
#include "mrw/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrw {

enum class Norm { one, two, inf };
enum class Method { exact, monte_carlo };
enum class Verdict { certified_stable, inconclusive };

constexpr std::string_view to_string(Norm n) {
  switch (n) {
    case Norm::one: return "one";
    case Norm::two: return "two";
    case Norm::inf: return "inf";
  }
  return "?";
}
constexpr std::string_view to_string(Method m) {
  return m == Method::exact ? "exact" : "monte_carlo";
}
constexpr std::string_view to_string(Verdict v) {
  return v == Verdict::certified_stable ? "certified_stable" : "inconclusive";
}

// Induced operator norm.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& m, Norm norm) {
  using Scalar = typename Derived::Scalar;
  switch (norm) {
    case Norm::one: return m.cwiseAbs().colwise().sum().maxCoeff();
    case Norm::inf: return m.cwiseAbs().rowwise().sum().maxCoeff();
    case Norm::two:
      if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
      return Eigen::JacobiSVD<Matrix<Scalar>>(m.eval()).singularValues()(0);
  }
  return Scalar(0);
}

template <typename Scalar = double>
struct StabilityReport {
  Index k = 0;
  Scalar value = 0;  // nats
  Method method = Method::exact;
  Scalar std_error = 0;
  std::size_t n_samples = 0;
  Norm norm = Norm::two;
  Verdict verdict = Verdict::inconclusive;
};

// Values this close to zero are rounding noise (isometries give log 1 up to a
// few ulps) and never certify.
inline constexpr double kVerdictZeroTolerance = 1e-12;

namespace detail {

template <typename Scalar>
Verdict stability_verdict(Method method, Scalar value, Scalar std_error) {
  const Scalar bound = method == Method::exact ? value : value + Scalar(3) * std_error;
  return bound < -Scalar(kVerdictZeroTolerance) ? Verdict::certified_stable : Verdict::inconclusive;
}

// N^k, or nullopt once it exceeds `cap`.
inline std::optional<std::uint64_t> bounded_power(std::uint64_t base, Index k, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (Index i = 0; i < k; ++i) {
    if (total > cap / std::max<std::uint64_t>(base, 1)) return std::nullopt;
    total *= base;
  }
  return total <= cap ? std::optional<std::uint64_t>(total) : std::nullopt;
}

template <typename Scalar>
Scalar safe_log(Scalar x) {
  return x > Scalar(0) ? std::log(x) : -std::numeric_limits<Scalar>::infinity();
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Exact sum over all N^k mode sequences of
//   m_{i_1} p_{i_1 i_2} ... p_{i_{k-1} i_k} log||F_{i_k}...F_{i_1}||.
template <typename Scalar>
StabilityReport<Scalar> log_norm_expectation_exact(const AffineSystem<Scalar>& sys, Index k,
                                                   Norm norm = Norm::two,
                                                   std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require(k >= 1, ErrorKind::InvalidArgument, "k must be at least 1");
  const auto count = detail::bounded_power(static_cast<std::uint64_t>(sys.n_modes()), k, cap);
  detail::require(count.has_value(), ErrorKind::EnumerationTooLarge,
                  std::to_string(sys.n_modes()) + "^" + std::to_string(k) + " sequences exceed cap " +
                      std::to_string(cap));
  const auto m = stationary(sys.chain());
  const auto& p = sys.chain().p();
  const Index n = sys.dim();

  Scalar total = 0;
  std::vector<Matrix<Scalar>> products(static_cast<std::size_t>(k) + 1,
                                       Matrix<Scalar>::Identity(n, n));
  auto visit = [&](auto&& self, Index depth, Index last, Scalar weight) -> void {
    if (weight == Scalar(0)) return;
    if (depth == k) {
      total += weight * detail::safe_log(operator_norm(products[static_cast<std::size_t>(k)], norm));
      return;
    }
    for (Index i = 0; i < sys.n_modes(); ++i) {
      const Scalar w = depth == 0 ? m[i] : weight * p(last, i);
      products[static_cast<std::size_t>(depth) + 1].noalias() =
          sys.maps()[static_cast<std::size_t>(i)].f * products[static_cast<std::size_t>(depth)];
      self(self, depth + 1, i, w);
    }
  };
  visit(visit, 0, 0, Scalar(1));

  StabilityReport<Scalar> report;
  report.k = k;
  report.value = total;
  report.method = Method::exact;
  report.n_samples = static_cast<std::size_t>(*count);
  report.norm = norm;
  report.verdict = detail::stability_verdict(Method::exact, total, Scalar(0));
  return report;
}

// Sample mean of log||F_{i_k}...F_{i_1}|| over paths with i_1 ~ m, drawn
// sequentially from stream 0 of `seed`.
template <typename Scalar>
StabilityReport<Scalar> log_norm_expectation_mc(const AffineSystem<Scalar>& sys, Index k,
                                                std::size_t n_samples, std::uint64_t seed,
                                                Norm norm = Norm::two) {
  detail::require(k >= 1, ErrorKind::InvalidArgument, "k must be at least 1");
  detail::require(n_samples >= 2, ErrorKind::InvalidArgument, "n_samples must be at least 2");
  const auto m = stationary(sys.chain());
  const auto& p = sys.chain().p();
  const Index n = sys.dim();
  Rng rng(seed);

  // Welford accumulation.
  Scalar mean = 0, m2 = 0;
  Matrix<Scalar> product(n, n), scratch(n, n);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Index mode = rng.categorical(m.weights());
    product = sys.maps()[static_cast<std::size_t>(mode)].f;
    for (Index t = 1; t < k; ++t) {
      mode = rng.categorical(p.row(mode));
      scratch.noalias() = sys.maps()[static_cast<std::size_t>(mode)].f * product;
      product.swap(scratch);
    }
    const Scalar sample = detail::safe_log(operator_norm(product, norm));
    const Scalar delta = sample - mean;
    mean += delta / static_cast<Scalar>(s + 1);
    m2 += delta * (sample - mean);
  }
  StabilityReport<Scalar> report;
  report.k = k;
  report.value = mean;
  report.method = Method::monte_carlo;
  const Scalar variance = m2 / static_cast<Scalar>(n_samples - 1);
  report.std_error = std::isfinite(static_cast<double>(variance))
                         ? std::sqrt(std::max(variance, Scalar(0)) / static_cast<Scalar>(n_samples))
                         : Scalar(0);
  report.n_samples = n_samples;
  report.norm = norm;
  report.verdict = detail::stability_verdict(Method::monte_carlo, report.value, report.std_error);
  return report;
}

struct CertificateOptions {
  Norm norm = Norm::two;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::size_t mc_samples = 100'000;
  std::uint64_t seed = 0;
};

// Smallest k <= k_max whose report certifies stability, with its report.
// Exact enumeration is used while N^k fits under the cap, Monte Carlo with the
// 3-sigma rule beyond it.
template <typename Scalar>
std::optional<StabilityReport<Scalar>> stability_certificate(const AffineSystem<Scalar>& sys,
                                                             Index k_max,
                                                             const CertificateOptions& opts = {}) {
  detail::require(k_max >= 1, ErrorKind::InvalidArgument, "k_max must be at least 1");
  for (Index k = 1; k <= k_max; ++k) {
    const bool enumerable = detail::bounded_power(static_cast<std::uint64_t>(sys.n_modes()), k,
                                                  opts.enumeration_cap)
                                .has_value();
    const auto report = enumerable
                            ? log_norm_expectation_exact(sys, k, opts.norm, opts.enumeration_cap)
                            : log_norm_expectation_mc(sys, k, opts.mc_samples,
                                                      opts.seed + static_cast<std::uint64_t>(k),
                                                      opts.norm);
    if (report.verdict == Verdict::certified_stable) return report;
  }
  return std::nullopt;
}

template <typename Scalar>
std::optional<Index> first_negative_k(const AffineSystem<Scalar>& sys, Index k_max,
                                      const CertificateOptions& opts = {}) {
  const auto report = stability_certificate(sys, k_max, opts);
  return report ? std::optional<Index>(report->k) : std::nullopt;
}

template <typename Scalar = double>
struct SchurResult {
  Scalar rho = 0;
  bool schur = false;
};

template <typename Scalar>
SchurResult<Scalar> schur_check(const Matrix<Scalar>& f) {
  detail::require(f.rows() == f.cols() && f.rows() >= 1, ErrorKind::NonSquare,
                  "schur_check needs a square matrix");
  const Scalar rho =
      f.rows() == 1 ? std::abs(f(0, 0))
                    : Eigen::EigenSolver<Matrix<Scalar>>(f, false).eigenvalues().cwiseAbs().maxCoeff();
  return {rho, rho < Scalar(1) - Scalar(1e-12)};
}

inline constexpr std::size_t kRenormalizationStride = 32;

// log||F_n...F_1|| for a growing left product. Every `stride` factors the
// product is rescaled to unit norm and the log of the factor accumulated.
// A stride that underflows or overflows is redone with per-factor rescaling;
// a product that is exactly zero gives -inf.
template <typename Scalar = double>
class LogNormProduct {
 public:
  LogNormProduct(Index n, Norm norm = Norm::two, std::size_t stride = kRenormalizationStride)
      : norm_(norm), stride_(stride), product_(Matrix<Scalar>::Identity(n, n)),
        checkpoint_(product_), scratch_(n, n) {
    detail::require(stride_ >= 1, ErrorKind::ProductUnderflowUnrecoverable,
                    "renormalization stride must be at least 1");
  }

  void push(const Matrix<Scalar>& f) {
    if (zero_) return;
    pending_.push_back(&f);
    scratch_.noalias() = f * product_;
    product_.swap(scratch_);
    if (pending_.size() >= stride_) renormalize();
  }

  Scalar log_norm() {
    if (zero_) return -std::numeric_limits<Scalar>::infinity();
    renormalize();
    if (zero_) return -std::numeric_limits<Scalar>::infinity();
    return log_scale_ + std::log(operator_norm(product_, norm_));
  }

 private:
  void renormalize() {
    if (pending_.empty()) return;
    Scalar scale = operator_norm(product_, norm_);
    if (!(scale > Scalar(0)) || !std::isfinite(static_cast<double>(scale))) {
      // Redo this stride one factor at a time from the last checkpoint.
      product_ = checkpoint_;
      for (const auto* f : pending_) {
        scratch_.noalias() = *f * product_;
        product_.swap(scratch_);
        const Scalar s = operator_norm(product_, norm_);
        if (s == Scalar(0)) {
          zero_ = true;
          pending_.clear();
          return;
        }
        detail::require(std::isfinite(static_cast<double>(s)),
                        ErrorKind::ProductUnderflowUnrecoverable, "matrix product overflowed");
        product_ /= s;
        log_scale_ += std::log(s);
      }
      scale = operator_norm(product_, norm_);
    }
    product_ /= scale;
    log_scale_ += std::log(scale);
    checkpoint_ = product_;
    pending_.clear();
  }

  Norm norm_;
  std::size_t stride_;
  Matrix<Scalar> product_, checkpoint_, scratch_;
  std::vector<const Matrix<Scalar>*> pending_;
  Scalar log_scale_ = 0;
  bool zero_ = false;
};

// (1/n) log||F_{i_n}...F_{i_1}|| along one path with i_0 drawn from the
// stationary law. Negative under the stabilizing condition; the decay rate
// alpha is minus the returned value.
template <typename Scalar>
Scalar lyapunov_exponent(const AffineSystem<Scalar>& sys, std::size_t n_steps, std::uint64_t seed,
                         Norm norm = Norm::two, std::size_t stride = kRenormalizationStride) {
  detail::require(n_steps >= 1, ErrorKind::InvalidArgument, "n_steps must be at least 1");
  const auto m = stationary(sys.chain());
  const auto& p = sys.chain().p();
  Rng rng(seed);
  LogNormProduct<Scalar> product(sys.dim(), norm, stride);
  Index mode = rng.categorical(m.weights());
  for (std::size_t t = 0; t < n_steps; ++t) {
    mode = rng.categorical(p.row(mode));
    product.push(sys.maps()[static_cast<std::size_t>(mode)].f);
  }
  return product.log_norm() / static_cast<Scalar>(n_steps);
}

namespace detail {

template <typename Scalar>
Matrix<Scalar> solve_moment_system(const Matrix<Scalar>& lhs, const Vector<Scalar>& rhs,
                                   const char* what) {
  Eigen::FullPivLU<Matrix<Scalar>> lu(lhs);
  lu.setThreshold(Scalar(1e-10));
  require(lu.isInvertible(), ErrorKind::SingularMomentSystem, what);
  return lu.solve(rhs);
}

template <typename Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

// Mean of the stationary law. Unknowns y_j = E[Z_k 1{i_{k+1} = j}] satisfy
//   y_j = sum_i p_ij (F_i y_i + m_i c_i),
// an nN x nN linear system; the mean is sum_j y_j.
template <typename Scalar>
Vector<Scalar> stationary_mean(const AffineSystem<Scalar>& sys) {
  const auto m = stationary(sys.chain());
  const auto& p = sys.chain().p();
  const Index n = sys.dim(), modes = sys.n_modes();
  Matrix<Scalar> lhs = Matrix<Scalar>::Identity(n * modes, n * modes);
  Vector<Scalar> rhs = Vector<Scalar>::Zero(n * modes);
  for (Index j = 0; j < modes; ++j) {
    for (Index i = 0; i < modes; ++i) {
      const auto& w = sys.maps()[static_cast<std::size_t>(i)];
      lhs.block(j * n, i * n, n, n) -= p(i, j) * w.f;
      rhs.segment(j * n, n) += p(i, j) * m[i] * w.c;
    }
  }
  const Vector<Scalar> y =
      detail::solve_moment_system(lhs, rhs, "first-moment system is singular");
  Vector<Scalar> mean = Vector<Scalar>::Zero(n);
  for (Index j = 0; j < modes; ++j) mean += y.segment(j * n, n);
  return mean;
}

template <typename Scalar>
Vector<Scalar> stationary_mean(const ModeSystem<Scalar>& sys) {
  return stationary_mean(sys.affine());
}

template <typename Scalar = double>
struct StationaryMoments {
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;
  // Increment Z_{k+1} - Z_k under the stationary law.
  Vector<Scalar> increment_mean;
  Matrix<Scalar> increment_covariance;
};

// First and second stationary moments through x_j = E[Z_k 1{i_k = j}] and
// S_j = E[Z_k Z_k^T 1{i_k = j}]:
//   x_j = F_j u_j + m_j c_j,                      u_j = sum_i p_ij x_i
//   S_j = F_j V_j F_j^T + F_j u_j c_j^T + c_j u_j^T F_j^T + m_j c_j c_j^T,
//                                                  V_j = sum_i p_ij S_i
template <typename Scalar>
StationaryMoments<Scalar> stationary_moments(const AffineSystem<Scalar>& sys) {
  const auto m = stationary(sys.chain());
  const auto& p = sys.chain().p();
  const Index n = sys.dim(), modes = sys.n_modes(), nn = n * n;
  auto map = [&](Index i) -> const AffineMap<Scalar>& {
    return sys.maps()[static_cast<std::size_t>(i)];
  };

  Matrix<Scalar> lhs1 = Matrix<Scalar>::Identity(n * modes, n * modes);
  Vector<Scalar> rhs1(n * modes);
  for (Index j = 0; j < modes; ++j) {
    rhs1.segment(j * n, n) = m[j] * map(j).c;
    for (Index i = 0; i < modes; ++i) lhs1.block(j * n, i * n, n, n) -= p(i, j) * map(j).f;
  }
  const Vector<Scalar> x = detail::solve_moment_system(lhs1, rhs1, "first-moment system is singular");
  auto x_of = [&](Index i) { return x.segment(i * n, n); };

  Matrix<Scalar> lhs2 = Matrix<Scalar>::Identity(nn * modes, nn * modes);
  Vector<Scalar> rhs2(nn * modes);
  for (Index j = 0; j < modes; ++j) {
    const auto& w = map(j);
    Vector<Scalar> u = Vector<Scalar>::Zero(n);
    for (Index i = 0; i < modes; ++i) u += p(i, j) * x_of(i);
    const Matrix<Scalar> cross = w.f * u * w.c.transpose();
    const Matrix<Scalar> constant = cross + cross.transpose() + m[j] * w.c * w.c.transpose();
    rhs2.segment(j * nn, nn) = Eigen::Map<const Vector<Scalar>>(constant.data(), nn);
    const Matrix<Scalar> ff = detail::kron<Scalar>(w.f, w.f);
    for (Index i = 0; i < modes; ++i) lhs2.block(j * nn, i * nn, nn, nn) -= p(i, j) * ff;
  }
  const Vector<Scalar> s = detail::solve_moment_system(lhs2, rhs2, "second-moment system is singular");
  auto s_of = [&](Index i) {
    return Eigen::Map<const Matrix<Scalar>>(s.data() + i * nn, n, n);
  };

  StationaryMoments<Scalar> out;
  out.mean = Vector<Scalar>::Zero(n);
  Matrix<Scalar> second = Matrix<Scalar>::Zero(n, n);
  for (Index j = 0; j < modes; ++j) {
    out.mean += x_of(j);
    second += s_of(j);
  }
  out.covariance = second - out.mean * out.mean.transpose();

  // D = G_j Z_k + c_j on {i_k = i, i_{k+1} = j}, G_j = F_j - I.
  out.increment_mean = Vector<Scalar>::Zero(n);
  Matrix<Scalar> inc_second = Matrix<Scalar>::Zero(n, n);
  const Matrix<Scalar> identity = Matrix<Scalar>::Identity(n, n);
  for (Index i = 0; i < modes; ++i) {
    for (Index j = 0; j < modes; ++j) {
      if (p(i, j) == Scalar(0)) continue;
      const Matrix<Scalar> g = map(j).f - identity;
      const Vector<Scalar>& c = map(j).c;
      const Matrix<Scalar> cross = g * x_of(i) * c.transpose();
      out.increment_mean += p(i, j) * (g * x_of(i) + m[i] * c);
      inc_second += p(i, j) * (g * s_of(i) * g.transpose() + cross + cross.transpose() +
                               m[i] * c * c.transpose());
    }
  }
  out.increment_covariance = inc_second - out.increment_mean * out.increment_mean.transpose();
  return out;
}

template <typename Scalar = double>
struct ErgodicReport {
  std::size_t n_steps = 0;
  Vector<Scalar> running_average;
  Vector<Scalar> oracle_mean;
  Scalar deviation = 0;  // max-abs difference
  Scalar lyapunov_estimate = 0;  // nats per step
};

// Time average of Z_0, ..., Z_n (n + 1 terms) along one trajectory whose mode
// chain starts from its stationary law, compared with stationary_mean. The
// Lyapunov estimate uses the products along the same path.
template <typename Scalar>
ErgodicReport<Scalar> ergodic_average(const AffineSystem<Scalar>& sys,
                                      const InitialLaw<Scalar>& init, std::size_t n_steps,
                                      std::uint64_t seed, Norm norm = Norm::two) {
  detail::require(n_steps >= 1, ErrorKind::InvalidArgument, "n_steps must be at least 1");
  const auto started = sys.with_init_dist(stationary(sys.chain()));
  ErgodicReport<Scalar> report;
  report.n_steps = n_steps;
  report.oracle_mean = stationary_mean(sys);
  Vector<Scalar> sum = Vector<Scalar>::Zero(sys.dim());
  LogNormProduct<Scalar> product(sys.dim(), norm);
  Rng rng(seed);
  simulate_forward(started, init, n_steps, rng,
                   [&](std::size_t k, Index mode, const Vector<Scalar>& x) {
                     sum += x;
                     if (k > 0) product.push(sys.maps()[static_cast<std::size_t>(mode)].f);
                   });
  report.running_average = sum / static_cast<Scalar>(n_steps + 1);
  report.deviation = (report.running_average - report.oracle_mean).cwiseAbs().maxCoeff();
  report.lyapunov_estimate = product.log_norm() / static_cast<Scalar>(n_steps);
  return report;
}

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
template <typename Scalar>
Scalar ks_statistic(std::vector<Scalar> a, std::vector<Scalar> b) {
  detail::require(!a.empty() && !b.empty(), ErrorKind::EmptySample, "KS sample is empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<Scalar>(a.size()), nb = static_cast<Scalar>(b.size());
  std::size_t i = 0, j = 0;
  Scalar d = 0;
  while (i < a.size() && j < b.size()) {
    const Scalar x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<Scalar>(i) / na - static_cast<Scalar>(j) / nb));
  }
  return d;
}

// Maximum over coordinates of the two-sample KS statistic.
template <typename Scalar>
Scalar empirical_distribution_distance(const std::vector<Vector<Scalar>>& a,
                                       const std::vector<Vector<Scalar>>& b) {
  detail::require(!a.empty() && !b.empty(), ErrorKind::EmptySample, "sample set is empty");
  const Index n = a.front().size();
  for (const auto* set : {&a, &b})
    for (const auto& v : *set)
      detail::require(v.size() == n, ErrorKind::DimensionMismatch, "samples disagree in dimension");
  Scalar d = 0;
  std::vector<Scalar> ca(a.size()), cb(b.size());
  for (Index c = 0; c < n; ++c) {
    for (std::size_t s = 0; s < a.size(); ++s) ca[s] = a[s][c];
    for (std::size_t s = 0; s < b.size(); ++s) cb[s] = b[s][c];
    d = std::max(d, ks_statistic(ca, cb));
  }
  return d;
}

// Asymptotic 1% critical value 1.63 sqrt((n_a + n_b) / (n_a n_b)).
inline double ks_critical_value(std::size_t n_a, std::size_t n_b) {
  const auto a = static_cast<double>(n_a), b = static_cast<double>(n_b);
  return 1.63 * std::sqrt((a + b) / (a * b));
}

struct DistanceRow {
  std::size_t init_a = 0;
  std::size_t init_b = 0;
  std::size_t k = 0;
  double distance = 0;
};

struct InitialDistributionStudy {
  std::vector<std::string> warnings;
  std::vector<DistanceRow> rows;
  double critical_value = 0;
};

// Simulates n_traj walks for each initial mode distribution and reports the
// pairwise empirical distances at each snapshot time. Initial distribution d
// uses streams [d * n_traj, (d + 1) * n_traj) of `seed`. Violations of the
// standing hypotheses (min_i m_i > 0, every p_ij < 1) are reported as
// warnings.
template <typename Scalar>
InitialDistributionStudy proposition1_experiment(const AffineSystem<Scalar>& sys,
                                                 const InitialLaw<Scalar>& init,
                                                 const std::vector<Distribution<Scalar>>& init_dists,
                                                 const std::vector<std::size_t>& snapshots,
                                                 std::size_t n_traj, std::uint64_t seed) {
  detail::require(init_dists.size() >= 2, ErrorKind::InvalidArgument,
                  "need at least two initial distributions");
  InitialDistributionStudy study;
  const auto m = stationary(sys.chain());
  if (!(m.weights().minCoeff() > Scalar(0)))
    study.warnings.push_back("stationary distribution has a zero entry");
  if (sys.chain().p().maxCoeff() >= Scalar(1))
    study.warnings.push_back("some transition probability equals 1");

  std::vector<std::vector<std::vector<Vector<Scalar>>>> samples;
  for (std::size_t d = 0; d < init_dists.size(); ++d)
    samples.push_back(batch_snapshots(sys.with_init_dist(init_dists[d]), init, snapshots, n_traj,
                                      seed, static_cast<std::uint64_t>(d * n_traj)));
  for (std::size_t s = 0; s < snapshots.size(); ++s)
    for (std::size_t a = 0; a < init_dists.size(); ++a)
      for (std::size_t b = a + 1; b < init_dists.size(); ++b)
        study.rows.push_back({a, b, snapshots[s],
                              static_cast<double>(
                                  empirical_distribution_distance(samples[a][s], samples[b][s]))});
  study.critical_value = ks_critical_value(n_traj, n_traj);
  return study;
}

// Least-squares slope of log||Zb_{k+1} - Zb_k|| against k, pooled over
// n_paths backward trajectories driven by the reversed chain. Zero increments
// (underflow) are skipped.
template <typename Scalar>
Scalar backward_increment_slope(const AffineSystem<Scalar>& sys, const Vector<Scalar>& x0,
                                std::size_t horizon, std::size_t n_paths, std::uint64_t seed) {
  detail::require(horizon >= 2 && n_paths >= 1, ErrorKind::InvalidArgument,
                  "need horizon >= 2 and at least one path");
  Scalar sk = 0, sy = 0, skk = 0, sky = 0, count = 0;
  for (std::size_t j = 0; j < n_paths; ++j) {
    Rng rng(seed, j);
    const auto traj = sample_backward_trajectory(sys, x0, horizon, rng);
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
      const Scalar inc = (traj.states[k + 1] - traj.states[k]).norm();
      if (!(inc > Scalar(0))) continue;
      const auto kk = static_cast<Scalar>(k);
      const Scalar y = std::log(inc);
      sk += kk;
      sy += y;
      skk += kk * kk;
      sky += kk * y;
      count += 1;
    }
  }
  detail::require(count >= 2, ErrorKind::InvalidArgument, "too few nonzero increments");
  return (count * sky - sk * sy) / (count * skk - sk * sk);
}

// Per-coordinate sample variance of the forward increment Z_{k+1} - Z_k across
// n_traj trajectories, for k = k_first..k_last. Trajectory j uses stream j.
template <typename Scalar>
std::vector<Vector<Scalar>> forward_increment_variance(const AffineSystem<Scalar>& sys,
                                                       const InitialLaw<Scalar>& init,
                                                       std::size_t k_first, std::size_t k_last,
                                                       std::size_t n_traj, std::uint64_t seed) {
  detail::require(k_first <= k_last && n_traj >= 2, ErrorKind::InvalidArgument,
                  "bad increment window");
  std::vector<std::size_t> times;
  for (std::size_t k = k_first; k <= k_last + 1; ++k) times.push_back(k);
  const auto snaps = batch_snapshots(sys, init, times, n_traj, seed);
  std::vector<Vector<Scalar>> out;
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    Vector<Scalar> mean = Vector<Scalar>::Zero(sys.dim());
    Vector<Scalar> sq = Vector<Scalar>::Zero(sys.dim());
    for (std::size_t j = 0; j < n_traj; ++j) {
      const Vector<Scalar> d = snaps[s + 1][j] - snaps[s][j];
      mean += d;
      sq += d.cwiseAbs2();
    }
    const auto n = static_cast<Scalar>(n_traj);
    mean /= n;
    out.push_back((sq - n * mean.cwiseAbs2()) / (n - Scalar(1)));
  }
  return out;
}

}  // namespace mrw

#endif  // MRW_ANALYSIS_HPP
