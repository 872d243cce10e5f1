#include "polysr/certificate.hpp"
#include "support.hpp"

using namespace polysr;
using polysr::test::kPi;

TEST(JacksonKernel, NormalizedEvenAndPeaked) {
  for (int N : {16, 17, 64, 128}) {
    JacksonKernel k(N);
    EXPECT_EQ(k.degree(), N - N % 2);
    EXPECT_NEAR(k.value(0.0), 1.0, 1e-13);
    double sum = 0.0;
    for (int j = -k.degree(); j <= k.degree(); ++j) sum += k.coeff(j);
    EXPECT_NEAR(sum, 1.0, 1e-13);
    for (double t : {0.05, 0.4, 2.0}) {
      EXPECT_NEAR(k.value(t), k.value(-t), 1e-14);
      EXPECT_LT(k.value(t), 1.0);
      const double h = 1e-6;
      EXPECT_NEAR(k.d1(t), (k.value(t + h) - k.value(t - h)) / (2 * h), 1e-5);
      EXPECT_NEAR(k.d2(t), (k.d1(t + h) - k.d1(t - h)) / (2 * h), 1e-3 * N);
    }
    const int m = k.degree() / 2 + 1;
    for (double t : {0.07, 0.9, 3.0}) {
      const double f = std::sin(m * t / 2) / (m * std::sin(t / 2));
      EXPECT_NEAR(k.value(t), f * f * f * f, 1e-13);
    }
    double direct = 0.0;
    for (int j = -k.degree(); j <= k.degree(); ++j) direct += k.coeff(j) * std::cos(j * 0.3);
    EXPECT_NEAR(direct, k.value(0.3), 1e-13);
  }
  EXPECT_POLYSR_ERROR(JacksonKernel(1), ErrorCode::validation);
}

TEST(ReflectKnots, MirrorsAboutZero) {
  const std::vector<double> t{-2.5, -1.0};
  const std::vector<cdouble> u{cdouble(0, 1), -1.0};
  const auto r = reflect_knots(t, u);
  ASSERT_EQ(r.t.size(), 4u);
  EXPECT_EQ(r.t[0], -2.5);
  EXPECT_EQ(r.t[1], -1.0);
  EXPECT_EQ(r.t[2], 1.0);
  EXPECT_EQ(r.t[3], 2.5);
  EXPECT_EQ(r.u[2], cdouble(-1.0));
  EXPECT_EQ(r.u[3], cdouble(0, 1));
  const std::vector<double> at_zero{-1.0, 0.0};
  EXPECT_POLYSR_ERROR(reflect_knots(at_zero, u), ErrorCode::reflection_collision);
  const std::vector<double> unsorted{-1.0, -2.0};
  EXPECT_POLYSR_ERROR(reflect_knots(unsorted, u), ErrorCode::validation);
}

TEST(TrigCertificate, InterpolatesWithFlatTangent) {
  const int N = 64;
  std::mt19937_64 rng(1);
  const auto t = test::separated_angles(rng, 5, N, 4.0);
  std::vector<cdouble> u;
  for (std::size_t i = 0; i < t.size(); ++i) u.push_back(test::unit_phase(rng));
  const auto c = build_trig_certificate(t, u, N);
  EXPECT_EQ(c.poly.degree, N);
  for (std::size_t m = 0; m < t.size(); ++m) {
    EXPECT_NEAR(std::abs(c.poly(t[m]) - u[m]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(c.poly.derivative(t[m])), 0.0, 1e-9);
  }
}

TEST(Symmetrize, EvenPartAndAlgebraicForm) {
  Eigen::VectorXcd a(5);
  a << cdouble(1, 1), 2.0, cdouble(0.5, -1), 3.0, cdouble(-1, 0);
  const TrigPoly q(2, a);
  const EvenTrigPoly e = symmetrize(q);
  const AlgebraicPoly p = to_algebraic(e);
  for (double t : {0.1, 1.3, 2.9}) {
    const cdouble want = 0.5 * (q(t) + q(-t));
    EXPECT_NEAR(std::abs(e(t) - want), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(p(std::cos(t)) - want), 0.0, 1e-14);
  }
  EXPECT_POLYSR_ERROR(TrigPoly(2, Eigen::VectorXcd::Zero(4)), ErrorCode::shape);
}

TEST(BuildCertificate, PassesVerificationOnSeparatedKnots) {
  const int N = 128;
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 3; ++rep) {
    const auto x = test::to_x(test::separated_angles(rng, 8, N, 4.0));
    std::vector<cdouble> u;
    for (std::size_t i = 0; i < x.size(); ++i) u.push_back(test::unit_phase(rng));
    const auto b = build_certificate(x, u, N);
    EXPECT_LE(b.poly.degree, N);
    EXPECT_TRUE(b.separation.satisfied);
    const auto r = verify_certificate(b.poly, x, u);
    EXPECT_TRUE(r.passed) << "off-support max " << r.off_support_max;
    EXPECT_LE(r.interpolation_residual, 1e-9);
    EXPECT_LT(r.off_support_max, 1.0);
    EXPECT_EQ(r.grid_size, 16 * N);
    EXPECT_NEAR(r.exclusion_radius, 4 * kPi / N / 100, 1e-15);
  }
}

TEST(BuildCertificate, InputChecks) {
  const std::vector<double> x{0.1, 0.5};
  const std::vector<cdouble> u{1.0, 2.0};
  EXPECT_POLYSR_ERROR(build_certificate(x, u, 128), ErrorCode::validation);
  const std::vector<cdouble> u2{1.0, -1.0};
  const std::vector<double> close{0.1, 0.1001};
  EXPECT_POLYSR_ERROR(build_certificate(close, u2, 128), ErrorCode::separation);
  const std::vector<cdouble> u1{1.0};
  EXPECT_POLYSR_ERROR(build_certificate(x, u1, 128), ErrorCode::shape);
  // forced: mild violations still build, coincident-ish knots are singular
  const std::vector<double> mild{std::cos(1.0), std::cos(1.0 + 3 * kPi / 128)};
  const auto b = build_certificate(mild, u2, 128, false);
  EXPECT_FALSE(b.separation.satisfied);
  EXPECT_NEAR(std::abs(b.poly(mild[0]) - u2[0]), 0.0, 1e-9);
  EXPECT_POLYSR_ERROR(build_certificate(close, u2, 128, false), ErrorCode::construction);
}

TEST(BuildCertificate, SmallNWarns) {
  const std::vector<double> x{0.0};
  const std::vector<cdouble> u{1.0};
  const auto b = build_certificate(x, u, 32);
  EXPECT_FALSE(b.warnings.empty());
  EXPECT_TRUE(verify_certificate(b.poly, x, u).passed);
}

TEST(VerifyCertificate, DetectsBadPolynomials) {
  // P = T_2 reaches 1 at x = +-1, away from the knot at 0 (where P = -1).
  AlgebraicPoly p{2, Eigen::VectorXcd::Zero(3)};
  p.cheb_coeffs[2] = 1.0;
  const std::vector<double> x{0.0};
  const std::vector<cdouble> u{-1.0};
  const auto r = verify_certificate(p, x, u);
  EXPECT_LE(r.interpolation_residual, 1e-15);
  EXPECT_NEAR(r.off_support_max, 1.0, 1e-12);
  EXPECT_FALSE(r.passed);
  const std::vector<cdouble> wrong{1.0};
  EXPECT_NEAR(verify_certificate(p, x, wrong).interpolation_residual, 2.0, 1e-15);
  VerifyOptions o;
  o.grid_points_per_degree = 4;
  EXPECT_POLYSR_ERROR(verify_certificate(p, x, u, o), ErrorCode::validation);
}

TEST(GoldenSection, FindsInteriorMaximum) {
  const double t = golden_section_max([](double v) { return -(v - 0.3) * (v - 0.3); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(t, 0.3, 1e-9);
}
