#include <chrono>

#include "polysr/spline_recovery.hpp"
#include "support.hpp"

using namespace polysr;

namespace {

SplineProblem problem_for(const Spline& s, const BasisSpec& b) {
  return SplineProblem{moments_of_spline(s, b), s.degree(), s.boundary_left(), s.boundary_right()};
}

MomentVector derivative_truth(const Spline& s, const BasisSpec& b) {
  const auto d = spline_distributional_derivative(s);
  if (const auto* m = std::get_if<DiracMeasure>(&d)) return moments_of_dirac(*m, b);
  return moments_of_spline(std::get<Spline>(d), b);
}

double sup_error(const Spline& a, const Spline& b, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -1.0 + 2.0 * i / (points - 1);
    worst = std::max(worst, std::abs(eval_spline(a, x) - eval_spline(b, x)));
  }
  return worst;
}

}  // namespace

TEST(DerivativeMoments, IntegrationByParts) {
  std::mt19937_64 rng(31);
  for (auto kind : {BasisKind::monomial, BasisKind::chebyshev, BasisKind::legendre}) {
    for (int r = 0; r <= 3; ++r) {
      const Spline s = test::random_spline(rng, r, 3, 40);
      const BasisSpec b{kind, 40};
      const MomentVector got = derivative_moments(moments_of_spline(s, b), s.boundary_left()[0],
                                                  s.boundary_right()[0]);
      const MomentVector want = derivative_truth(s, b);
      EXPECT_LT((got.values - want.values).norm(), 1e-9 * want.values.norm())
          << to_string(kind) << " r=" << r;
    }
  }
}

TEST(IntegrateBack, RebuildsSpline) {
  std::mt19937_64 rng(32);
  for (int r = 0; r <= 3; ++r) {
    const Spline s = test::random_spline(rng, r, 4, 64);
    // the r-th derivative of s jumps at the knots; rebuild from those jumps
    Spline d = s;
    for (int j = 0; j < r; ++j) d = std::get<Spline>(spline_distributional_derivative(d));
    const auto jumps = std::get<DiracMeasure>(spline_distributional_derivative(d));
    const Spline back = integrate_back(jumps, s.boundary_left(), r);
    EXPECT_LT(sup_error(s, back, 2001), 1e-11) << "r=" << r;
  }
  const std::vector<cdouble> short_left{1.0};
  EXPECT_POLYSR_ERROR(integrate_back(DiracMeasure(), short_left, 2), ErrorCode::validation);
}

TEST(ConsistencyCheck, ZeroForTruth) {
  std::mt19937_64 rng(33);
  const Spline s = test::random_spline(rng, 2, 3, 64);
  const auto p = problem_for(s, {BasisKind::chebyshev, 64});
  const auto rep = consistency_check(s, p);
  EXPECT_LT(rep.moment_residual, 1e-13);
  EXPECT_LT(rep.boundary_left_residual, 1e-12);
  EXPECT_LT(rep.boundary_right_residual, 1e-12);
  EXPECT_LT(rep.continuity_residual, 1e-12);
}

TEST(SplineProblem, Validation) {
  SplineProblem p{MomentVector({BasisKind::chebyshev, 8}, Eigen::VectorXcd::Zero(9)), 1, {0.0, 0.0}, {0.0}};
  EXPECT_POLYSR_ERROR(p.validate(), ErrorCode::validation);
  p.boundary_right = {0.0, 0.0};
  p.validate();
  p.boundary_left[0] = cdouble(std::nan(""), 0);
  EXPECT_POLYSR_ERROR(p.validate(), ErrorCode::validation);
  p.boundary_left[0] = 0.0;
  p.degree = -1;
  EXPECT_POLYSR_ERROR(p.validate(), ErrorCode::validation);
}

TEST(RecoverSpline, RoundTripLowDegrees) {
  std::mt19937_64 rng(34);
  const BasisSpec b{BasisKind::chebyshev, 128};
  for (int r = 0; r <= 3; ++r) {
    for (int rep = 0; rep < 3; ++rep) {
      const Spline s = test::random_spline(rng, r, 1 + rep * 3, 128);
      const auto start = std::chrono::steady_clock::now();
      const auto sol = recover_spline(problem_for(s, b));
      const double sec =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      EXPECT_LT(sup_error(s, sol.spline, 10000), 1e-6) << "r=" << r;
      EXPECT_LT(sol.report.boundary_right_residual, 1e-8);
      EXPECT_EQ(sol.jumps.size(), s.knots().size());
      EXPECT_LT(sec, 5.0);
    }
  }
}

TEST(RecoverSpline, LegendreData) {
  std::mt19937_64 rng(35);
  const Spline s = test::random_spline(rng, 1, 4, 128);
  const auto sol = recover_spline(problem_for(s, {BasisKind::legendre, 128}));
  EXPECT_LT(sup_error(s, sol.spline, 4001), 1e-6);
}

TEST(RecoverSpline, PolynomialWithoutKnots) {
  const Spline s(2, {}, {{cdouble(1, 0), cdouble(0, 1), 0.5}});
  const auto sol = recover_spline(problem_for(s, {BasisKind::chebyshev, 32}));
  EXPECT_TRUE(sol.jumps.empty());
  EXPECT_LT(sup_error(s, sol.spline, 1001), 1e-10);
  EXPECT_FALSE(sol.warnings.empty());  // N below 128
}

TEST(RecoverSpline, InconsistentBoundaryData) {
  std::mt19937_64 rng(36);
  const Spline s = test::random_spline(rng, 1, 3, 128);
  auto p = problem_for(s, {BasisKind::chebyshev, 128});
  p.boundary_right[0] += 0.5;
  EXPECT_POLYSR_ERROR(recover_spline(p), ErrorCode::inconsistent);
}
