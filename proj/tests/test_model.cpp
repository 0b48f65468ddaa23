#include "doctest.h"
#include "oracles.hpp"

using namespace mrw;
using mrw::testing::Mat;
using mrw::testing::Vec;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

bool row_stochastic(const Mat& m) {
  return (m.array() >= 0).all() &&
         ((m.rowwise().sum().array() - 1.0).abs() <= kStochasticTolerance).all();
}

void check_constructor_invariants(const ModeSystem<double>& sys) {
  CHECK((sys.a().alpha().array() >= 0).all());
  CHECK((sys.a().alpha().array() <= 1).all());
  for (const auto& mode : sys.modes()) {
    CHECK(row_stochastic(mode.b));
    CHECK(row_stochastic(mode.w));
  }
}

}  // namespace

TEST_CASE("learning matrix range") {
  CHECK_NOTHROW(LearningMatrix<double>(vec({0.0, 1.0})));
  CHECK_THROWS_AS(LearningMatrix<double>(vec({1.5})), Error);
  CHECK_THROWS_AS(LearningMatrix<double>(vec({-0.1})), Error);
  try {
    LearningMatrix<double>(vec({0.2, 1.01}));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AlphaOutOfRange);
  }
}

TEST_CASE("mode validation") {
  CHECK_THROWS_AS(Mode<double>::make(Mat::Constant(2, 2, 0.6), Mat::Identity(2, 2), Vec::Zero(2)),
                  Error);
  CHECK_THROWS_AS(Mode<double>::make(Mat::Identity(2, 2), Mat::Identity(2, 2), Vec::Zero(3)), Error);
}

TEST_CASE("effective_matrix") {
  const Mat one = Mat::Ones(1, 1);
  CHECK(effective_matrix(one, LearningMatrix<double>(vec({0.5})), one)(0, 0) == 0.5);

  const Mat f = effective_matrix<double>(Mat::Identity(2, 2), LearningMatrix<double>::constant(2, 0.5),
                                         Mat::Constant(2, 2, 0.5));
  Mat expected(2, 2);
  expected << 0.75, -0.25, -0.25, 0.75;
  CHECK((f - expected).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(1);
  const Mat b = testing::random_stochastic(3, rng), w = testing::random_stochastic(3, rng);
  CHECK(effective_matrix(b, LearningMatrix<double>::constant(3, 0.0), w) == b);

  CHECK_THROWS_AS(effective_matrix<double>(Mat::Identity(2, 2), LearningMatrix<double>::constant(3, 0.1),
                                           Mat::Identity(2, 2)),
                  Error);
}

TEST_CASE("effective_matrix is linear in b and affine in alpha") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const Mat b1 = testing::random_stochastic(4, rng), b2 = testing::random_stochastic(4, rng);
    const Mat w = testing::random_stochastic(4, rng);
    Vec a1(4), a2(4);
    for (Index i = 0; i < 4; ++i) {
      a1[i] = rng.uniform();
      a2[i] = rng.uniform();
    }
    const double s = rng.uniform();
    const LearningMatrix<double> a(a1);
    // Linear in b, with the A W term carried along once.
    const Mat mix = s * b1 + (1 - s) * b2;
    CHECK((effective_matrix(mix, a, w) -
           (s * effective_matrix(b1, a, w) + (1 - s) * effective_matrix(b2, a, w)))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
    const LearningMatrix<double> amix(s * a1 + (1 - s) * a2);
    CHECK((effective_matrix(b1, amix, w) -
           (s * effective_matrix(b1, LearningMatrix<double>(a1), w) +
            (1 - s) * effective_matrix(b1, LearningMatrix<double>(a2), w)))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
  }
}

TEST_CASE("affine_map") {
  const auto rw = classical_rw<double>(1, 0.5, {0.0, 1.0});
  CHECK(affine_map(rw, 1).f(0, 0) == 0.5);
  CHECK(affine_map(rw, 1).c[0] == 0.5);
  CHECK(affine_map(rw, 0).c[0] == 0.0);
  CHECK_THROWS_AS(affine_map(rw, 2), Error);

  const auto frozen = classical_rw<double>(3, 0.0, {7.0});
  CHECK(affine_map(frozen, 0).c.isZero());

  const auto ep = epstein<double>(vec({0.3}), {1.0});
  CHECK(std::abs(affine_map(ep, 0).f(0, 0) - 0.7) < 1e-15);
  CHECK(std::abs(affine_map(ep, 0).c[0] - 0.3) < 1e-15);
}

TEST_CASE("classical_rw") {
  const auto one = classical_rw<double>(1, 0.5, {0.0, 1.0});
  CHECK(one.n_modes() == 2);
  CHECK(affine_map(one, 0).f(0, 0) == 0.5);
  CHECK(affine_map(one, 1).f(0, 0) == 0.5);
  CHECK(one.chain()(0, 1) == 0.5);
  check_constructor_invariants(one);

  const auto two = classical_rw<double>(2, 0.3, {0.0, 1.0});
  const auto schur = schur_check(affine_map(two, 0).f);
  CHECK(std::abs(schur.rho - 1.0) < 1e-12);
  CHECK_FALSE(schur.schur);
  Eigen::SelfAdjointEigenSolver<Mat> eig(affine_map(two, 0).f);
  CHECK(std::abs(eig.eigenvalues()[0] - 0.7) < 1e-12);
  check_constructor_invariants(two);

  const auto full = classical_rw<double>(1, 1.0, {1.0});
  CHECK(affine_map(full, 0)(vec({0.0}))[0] == 1.0);

  CHECK_THROWS_AS(classical_rw<double>(1, 1.5, {1.0}), Error);
}

TEST_CASE("classical_rw with constant stimulus follows r(1 - (1 - alpha)^k)") {
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (double r : {1.0, 2.5}) {
      const auto sys = classical_rw<double>(1, alpha, {r});
      Vec x = Vec::Zero(1);
      for (int k = 1; k <= 100; ++k) {
        x = affine_map(sys, 0)(x);
        CHECK(std::abs(x[0] - r * (1 - std::pow(1 - alpha, k))) <= 1e-12);
      }
    }
  }
}

TEST_CASE("epstein") {
  const auto sys = epstein<double>(vec({0.2, 0.0, 0.7}));
  check_constructor_invariants(sys);
  const Mat f = affine_map(sys, 1).f;
  CHECK(f.isDiagonal());
  CHECK(std::abs(f(0, 0) - 0.8) < 1e-15);
  CHECK(f(1, 1) == 1.0);

  // The agent with alpha 0 keeps its initial value under every stimulus.
  Vec x = vec({0.4, 0.4, 0.4});
  for (int k = 0; k < 20; ++k) x = affine_map(sys, k % 2)(x);
  CHECK(x[1] == 0.4);

  const auto single = epstein<double>(vec({0.2}), {1.0});
  Vec y = vec({0.3});
  for (int k = 1; k <= 30; ++k) {
    y = affine_map(single, 0)(y);
    CHECK(std::abs(y[0] - (1 - std::pow(0.8, k) * (1 - 0.3))) < 1e-12);
  }
  CHECK_THROWS_AS(epstein<double>(vec({1.2})), Error);
}

TEST_CASE("friedkin_johnsen") {
  const Mat w = Mat::Constant(2, 2, 0.5);
  const Vec u = vec({0.0, 1.0});

  const auto stubborn = friedkin_johnsen<double>(w, Vec::Zero(2), u);
  CHECK(affine_map(stubborn, 0).f.isZero());
  CHECK(affine_map(stubborn, 0)(vec({5.0, -3.0})) == u);

  const auto degroot = friedkin_johnsen<double>(w, Vec::Ones(2), u);
  CHECK(affine_map(degroot, 0).f == w);
  CHECK(affine_map(degroot, 0).c.isZero());

  const auto fj = friedkin_johnsen<double>(w, Vec::Constant(2, 0.5), u);
  check_constructor_invariants(fj);
  // Fixed point (I - Lambda W)^{-1} (I - Lambda) u. By hand: x_2 = 3 x_1 and
  // 0.75 x_2 = 0.25 x_1 + 0.5, so x = [1/4, 3/4].
  const Mat lambda = 0.5 * Mat::Identity(2, 2);
  const Vec fixed = (Mat::Identity(2, 2) - lambda * w).lu().solve((Mat::Identity(2, 2) - lambda) * u);
  CHECK(std::abs(fixed[0] - 0.25) < 1e-15);
  CHECK(std::abs(fixed[1] - 0.75) < 1e-15);
  CHECK((affine_map(fj, 0)(fixed) - fixed).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(friedkin_johnsen<double>(w, vec({0.5, 1.5}), u), Error);
}

TEST_CASE("friedkin_johnsen step matches Lambda W x + (I - Lambda) u") {
  Rng rng(2024);
  for (int t = 0; t < 50; ++t) {
    const Mat w = testing::random_stochastic(5, rng, 0.0);
    Vec lambda(5);
    for (Index i = 0; i < 5; ++i) lambda[i] = rng.uniform();
    const Vec u = testing::random_vector(5, rng), x = testing::random_vector(5, rng);
    const auto sys = friedkin_johnsen<double>(w, lambda, u);
    const Vec expected = lambda.asDiagonal() * (w * x) + (Vec::Ones(5) - lambda).asDiagonal() * u;
    CHECK((affine_map(sys, 0)(x) - expected).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((forward_step(x, sys.mode(0), sys.a()) - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("attract_neglect_repulse") {
  const Mat avg = Mat::Constant(3, 3, 1.0 / 3);
  const auto sys = attract_neglect_repulse<double>(avg, vec({0.5, 0.3, 0.2}));
  check_constructor_invariants(sys);
  CHECK(sys.n_modes() == 3);
  const auto m = stationary(sys.chain());
  CHECK(std::abs(m[0] - 0.5) < 1e-12);
  CHECK(std::abs(m[2] - 0.2) < 1e-12);

  const Vec x = vec({0.0, 0.3, 0.9});
  const auto attract_only = attract_neglect_repulse<double>(avg, vec({1.0, 0.0, 0.0}));
  const auto traj = forward_trajectory(attract_only, InitialLaw<double>::point(x), 5, std::uint64_t{3});
  CHECK((traj.final_state - Vec::Constant(3, 0.4)).cwiseAbs().maxCoeff() < 1e-14);

  const auto neglect_only = attract_neglect_repulse<double>(avg, vec({0.0, 1.0, 0.0}));
  const auto still = forward_trajectory(neglect_only, InitialLaw<double>::point(x), 50, std::uint64_t{3});
  CHECK(still.final_state == x);

  // Without off-diagonal mass the repulsion step pushes away from W x.
  const auto diag = attract_neglect_repulse<double>(Mat::Identity(2, 2), vec({0.2, 0.3, 0.5}), 0.5);
  CHECK(row_stochastic(diag.mode(2).b));

  CHECK_THROWS_AS(attract_neglect_repulse<double>(avg, vec({0.5, 0.3, 0.3})), Error);
  try {
    attract_neglect_repulse<double>(avg, vec({0.5, 0.6, -0.1}));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ProbabilitySumViolation);
  }
}

TEST_CASE("with_independent_stimulus builds the product chain") {
  const auto a = LearningMatrix<double>::constant(2, 0.4);
  const Mat avg = Mat::Constant(2, 2, 0.5);
  std::vector<std::pair<Mat, Mat>> tops{{Mat::Identity(2, 2), avg}, {avg, avg}};
  Mat pt(2, 2), ps(2, 2);
  pt << 0.9, 0.1, 0.4, 0.6;
  ps << 0.5, 0.5, 0.2, 0.8;
  const auto sys = with_independent_stimulus<double>(a, tops, TransitionMatrix<double>::validate(pt),
                                                     {0.0, 1.0}, TransitionMatrix<double>::validate(ps));
  check_constructor_invariants(sys);
  CHECK(sys.n_modes() == 4);
  CHECK(sys.mode(3).r == Vec::Ones(2));
  CHECK(sys.mode(2).b == avg);
  CHECK(std::abs(sys.chain()(0, 3) - 0.1 * 0.5) < 1e-15);
}

TEST_CASE("effective matrices of row-stochastic modes have infinity norm at most 2") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto sys = testing::random_mode_system(4, 3, rng);
    for (Index i = 0; i < sys.n_modes(); ++i) {
      CHECK(affine_map(sys, i).f.cwiseAbs().rowwise().sum().maxCoeff() <= 2.0 + 1e-12);
      // Rows of F sum to 1 - alpha_i.
      CHECK(((affine_map(sys, i).f.rowwise().sum() - (Vec::Ones(4) - sys.a().alpha())).array().abs() <
             1e-12)
                .all());
    }
  }
}

TEST_CASE("affine system defaults and validation") {
  std::vector<AffineMap<double>> maps{{Mat::Constant(1, 1, 0.5), Vec::Zero(1)},
                                      {Mat::Constant(1, 1, 0.2), Vec::Ones(1)}};
  Mat p(2, 2);
  p << 0.9, 0.1, 0.2, 0.8;
  const AffineSystem<double> sys(maps, TransitionMatrix<double>::validate(p));
  CHECK(std::abs(sys.init_dist()[0] - 2.0 / 3.0) < 1e-12);

  const AffineSystem<double> reducible(maps, TransitionMatrix<double>::validate(Mat::Identity(2, 2)));
  CHECK(reducible.init_dist()[0] == 0.5);

  CHECK_THROWS_AS(AffineSystem<double>(maps, TransitionMatrix<double>::validate(Mat::Ones(1, 1))),
                  Error);
}
