#include <limits>

#include "polysr/bivariate.hpp"
#include "support.hpp"

using namespace polysr;
using polysr::test::kPi;

namespace {

double cheb(int k, double x) { return std::cos(k * std::acos(x)); }

std::vector<Point2> separated_points(std::mt19937_64& rng, int M, int N, double factor) {
  const double lo = 2 * kPi / N, hi = kPi - lo, sep = factor * kPi / N;
  std::vector<Point2> t;
  while (static_cast<int>(t.size()) < M) {
    const Point2 c{test::uniform(rng, lo, hi), test::uniform(rng, lo, hi)};
    bool ok = true;
    for (const auto& q : t) ok = ok && std::max(std::abs(q[0] - c[0]), std::abs(q[1] - c[1])) >= sep;
    if (ok) t.push_back(c);
  }
  std::vector<Point2> x;
  for (const auto& p : t) x.push_back({std::cos(p[0]), std::cos(p[1])});
  return x;
}

}  // namespace

TEST(DiracMeasure2D, SortsDropsAndRejects) {
  DiracMeasure2D m({{{0.5, 0.1}, 1.0}, {{-0.2, 0.3}, 0.0}, {{-0.2, -0.4}, -2.0}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.atoms()[0].location[0], -0.2);
  EXPECT_DOUBLE_EQ(tv_norm(m), 3.0);
  EXPECT_POLYSR_ERROR(DiracMeasure2D({{{0.1, 0.1}, 1.0}, {{0.1, 0.1}, 2.0}}),
                      ErrorCode::duplicate_location);
  EXPECT_POLYSR_ERROR(DiracMeasure2D({{{1.2, 0.1}, 1.0}}), ErrorCode::domain);
}

TEST(Separation2D, ThresholdAndNotes) {
  const int N = 64;
  const double sep = kSafeSeparationFactor2D * kPi / N;
  const std::vector<Point2> pts{{std::cos(1.0), std::cos(1.0)},
                                {std::cos(1.0 + sep), std::cos(1.0 + 0.1 * sep)}};
  auto r = check_separation_2d(pts, N);
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(r.below_guaranteed_regime);
  EXPECT_TRUE(r.note.empty());
  EXPECT_NEAR(r.min_pair_distance, sep, 1e-12);
  r = check_separation_2d(pts, N, 7.0);
  EXPECT_FALSE(r.satisfied);
  r = check_separation_2d(pts, N, kNominalSeparationFactor2D);
  EXPECT_TRUE(r.satisfied);
  EXPECT_FALSE(r.note.empty());
  EXPECT_POLYSR_ERROR(check_separation_2d(pts, 0), ErrorCode::validation);
}

TEST(Separation2D, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 200; ++rep) {
    const int N = 16 + static_cast<int>(test::uniform(rng) * 100);
    const int M = 1 + static_cast<int>(test::uniform(rng) * 6);
    std::vector<Point2> pts;
    for (int i = 0; i < M; ++i) pts.push_back({test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)});
    const auto r = check_separation_2d(pts, N);
    const double thr = kSafeSeparationFactor2D * kPi / N, lo = 2 * kPi / N, hi = kPi - lo;
    std::vector<std::size_t> dom;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double mind = std::numeric_limits<double>::infinity();
    for (int i = 0; i < M; ++i) {
      const double a = std::acos(pts[i][0]), b = std::acos(pts[i][1]);
      if (a < lo || a > hi || b < lo || b > hi) dom.push_back(i);
      for (int j = i + 1; j < M; ++j) {
        const double d = std::max(std::abs(a - std::acos(pts[j][0])), std::abs(b - std::acos(pts[j][1])));
        mind = std::min(mind, d);
        if (d < thr) pairs.emplace_back(i, j);
      }
    }
    EXPECT_EQ(r.domain_violations, dom);
    EXPECT_EQ(r.pair_violations, pairs);
    EXPECT_EQ(r.satisfied, dom.empty() && pairs.empty());
    if (M > 1) EXPECT_NEAR(r.min_pair_distance, mind, 1e-14);
  }
}

TEST(Moments2D, DoubleLoop) {
  std::mt19937_64 rng(42);
  std::vector<Atom2D> atoms;
  for (int i = 0; i < 4; ++i)
    atoms.push_back({{test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)}, test::uniform(rng, -2, 2)});
  const DiracMeasure2D m(atoms);
  const int N = 24;
  const Eigen::MatrixXd y = moments_2d(m, N);
  for (int k1 = 0; k1 <= N; ++k1)
    for (int k2 = 0; k2 <= N; ++k2) {
      double ref = 0;
      for (const auto& a : m.atoms()) ref += a.weight * cheb(k1, a.location[0]) * cheb(k2, a.location[1]);
      EXPECT_NEAR(y(k1, k2), ref, 1e-12);
    }
  const Eigen::MatrixXd yl = moments_2d(m, BasisSpec{BasisKind::legendre, N});
  for (int k1 = 0; k1 <= N; k1 += 5)
    for (int k2 = 0; k2 <= N; k2 += 3) {
      double ref = 0;
      for (const auto& a : m.atoms())
        ref += a.weight * std::legendre(k1, a.location[0]) * std::legendre(k2, a.location[1]);
      EXPECT_NEAR(yl(k1, k2), ref, 1e-11);
    }
}

TEST(BivariatePoly, EvaluatesTensorSum) {
  BivariatePoly p{3, Eigen::MatrixXd::Zero(4, 4)};
  p.cheb_coeffs(1, 2) = 2.0;
  p.cheb_coeffs(3, 0) = -1.0;
  for (double a : {-0.4, 0.7})
    for (double b : {-0.9, 0.2})
      EXPECT_NEAR(p(a, b), 2 * cheb(1, a) * cheb(2, b) - cheb(3, a), 1e-14);
}

TEST(KroneckerLpOperator, AgreesWithDenseMatrix) {
  const int N = 4, G = 7;
  const auto grid = lp_grid(G);
  const KroneckerLpOperator op(N, grid);
  ASSERT_EQ(op.rows(), 25);
  ASSERT_EQ(op.cols(), 49);
  Eigen::MatrixXd a(25, 49);
  for (int k1 = 0; k1 <= N; ++k1)
    for (int k2 = 0; k2 <= N; ++k2)
      for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) a(k1 * 5 + k2, i * G + j) = cheb(k1, grid[i]) * cheb(k2, grid[j]);
  std::mt19937_64 rng(43);
  Eigen::VectorXd x(49), d(49), y(25);
  for (int i = 0; i < 49; ++i) {
    x[i] = test::uniform(rng, -1, 1);
    d[i] = test::uniform(rng, 0.1, 2);
  }
  for (int i = 0; i < 25; ++i) y[i] = test::uniform(rng, -1, 1);
  EXPECT_LT((op.apply(x) - a * x).norm(), 1e-12);
  EXPECT_LT((op.apply_transpose(y) - a.transpose() * y).norm(), 1e-12);
  EXPECT_LT((op.normal(d) - a * d.asDiagonal() * a.transpose()).norm(), 1e-11);
  const std::vector<Eigen::Index> idx{0, 13, 48};
  EXPECT_LT((op.columns(idx) - a(Eigen::all, idx)).norm(), 1e-13);
}

TEST(Certificate2D, BuildsAndVerifiesAtN64) {
  std::mt19937_64 rng(44);
  const int N = 64;
  const auto pts = separated_points(rng, 4, N, kSafeSeparationFactor2D);
  const std::vector<double> signs{1, -1, 1, -1};
  const auto b = build_certificate_2d(pts, signs, N);
  EXPECT_TRUE(b.separation.satisfied);
  EXPECT_TRUE(b.separation.below_guaranteed_regime);
  EXPECT_FALSE(b.warnings.empty());
  EXPECT_EQ(b.poly.cheb_coeffs.rows(), N + 1);
  for (std::size_t m = 0; m < pts.size(); ++m) {
    EXPECT_NEAR(b.poly(pts[m][0], pts[m][1]), signs[m], 1e-9);
    const double h = 1e-6;
    EXPECT_NEAR((b.poly(pts[m][0] + h, pts[m][1]) - b.poly(pts[m][0] - h, pts[m][1])) / (2 * h), 0.0, 1e-4);
  }
  const auto r = verify_certificate_2d(b.poly, pts, signs);
  EXPECT_TRUE(r.passed) << r.off_support_max;
  EXPECT_EQ(r.grid_size, 8 * N);
  EXPECT_LT(r.off_support_max, 1.0);
}

TEST(Certificate2D, InputChecks) {
  const std::vector<Point2> pts{{0.1, 0.1}, {0.1001, 0.1}};
  const std::vector<double> signs{1, 1};
  EXPECT_POLYSR_ERROR(build_certificate_2d(pts, signs, 64), ErrorCode::separation);
  const std::vector<double> bad{1, 0.5};
  EXPECT_POLYSR_ERROR(build_certificate_2d(pts, bad, 64, kSafeSeparationFactor2D, false),
                      ErrorCode::validation);
  const std::vector<double> one{1};
  EXPECT_POLYSR_ERROR(build_certificate_2d(pts, one, 64), ErrorCode::shape);
  BivariatePoly p{4, Eigen::MatrixXd::Zero(5, 5)};
  VerifyOptions2D o;
  o.grid_points_per_degree = 2;
  EXPECT_POLYSR_ERROR(verify_certificate_2d(p, pts, signs, o), ErrorCode::validation);
}

TEST(Verify2D, FlagsLargeOffSupportValues) {
  // P = T_2(x1): |P| = 1 along x1 = +-1, away from a knot at the origin.
  BivariatePoly p{2, Eigen::MatrixXd::Zero(3, 3)};
  p.cheb_coeffs(2, 0) = 1.0;
  const std::vector<Point2> pts{{0.0, 0.0}};
  const std::vector<double> signs{-1};
  const auto r = verify_certificate_2d(p, pts, signs);
  EXPECT_LE(r.interpolation_residual, 1e-15);
  EXPECT_FALSE(r.passed);
}

TEST(RecoverSpikes2D, OnGridExact) {
  const int N = 16, G = 2 * N + 1;
  const auto grid = lp_grid(G);
  const DiracMeasure2D m({{{grid[5], grid[20]}, 1.5}, {{grid[22], grid[8]}, -0.7}, {{grid[12], grid[12]}, 1.0}});
  const auto sol = recover_spikes_2d(moments_2d(m, N));
  EXPECT_EQ(sol.lp_grid_size, G);
  EXPECT_LE(sol.lp_objective, tv_norm(m) + 1e-7);
  ASSERT_EQ(sol.measure.size(), m.size());
  for (const auto& a : m.atoms()) {
    bool found = false;
    for (const auto& b : sol.measure.atoms())
      if (std::abs(a.location[0] - b.location[0]) < 1e-9 && std::abs(a.location[1] - b.location[1]) < 1e-9) {
        found = true;
        EXPECT_NEAR(a.weight, b.weight, 1e-6);
      }
    EXPECT_TRUE(found);
  }
  EXPECT_LT(sol.residual, 1e-8);
}

TEST(RecoverSpikes2D, ShapeAndZero) {
  EXPECT_POLYSR_ERROR(recover_spikes_2d(Eigen::MatrixXd::Zero(3, 4)), ErrorCode::shape);
  const auto sol = recover_spikes_2d(Eigen::MatrixXd::Zero(5, 5));
  EXPECT_TRUE(sol.measure.empty());
}
