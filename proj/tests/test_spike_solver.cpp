#include "polysr/spike_solver.hpp"
#include "support.hpp"

using namespace polysr;
using polysr::test::kPi;

namespace {

DiracMeasure random_spikes(std::mt19937_64& rng, int M, int N, double factor, bool real = false) {
  std::vector<Atom> atoms;
  for (double x : test::to_x(test::separated_angles(rng, M, N, factor))) {
    const cdouble w = real ? cdouble((test::uniform(rng) < 0.5 ? -1 : 1) * (0.5 + test::uniform(rng)))
                           : test::unit_phase(rng);
    atoms.push_back({x, w});
  }
  return DiracMeasure(atoms);
}

void expect_same(const DiracMeasure& got, const DiracMeasure& want, double loc_tol, double w_tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_LE(cheb_distance(got.atoms()[i].location, want.atoms()[i].location), loc_tol);
    EXPECT_LE(std::abs(got.atoms()[i].weight - want.atoms()[i].weight),
              w_tol * std::abs(want.atoms()[i].weight));
  }
}

}  // namespace

TEST(SolverOptions, Validation) {
  SolverOptions o;
  o.validate();
  o.lp_grid_size = 1;
  EXPECT_POLYSR_ERROR(o.validate(), ErrorCode::validation);
  o = {};
  o.residual_tol = 0.0;
  EXPECT_POLYSR_ERROR(o.validate(), ErrorCode::validation);
  EXPECT_EQ(parse_solver_method("lp"), SolverMethod::lp);
  EXPECT_EQ(to_string(SolverMethod::pencil), "pencil");
  EXPECT_POLYSR_ERROR(parse_solver_method("prony"), ErrorCode::validation);
}

TEST(RecastMoments, CosineRelabelling) {
  DiracMeasure m({{std::cos(0.4), cdouble(1, 1)}, {std::cos(2.2), -0.5}});
  const MomentVector y = moments_of_dirac(m, {BasisKind::legendre, 20});
  const RecastMoments s = recast_moments(y);
  ASSERT_EQ(s.N, 20);
  for (int k = 0; k <= 20; ++k) {
    const cdouble want = cdouble(1, 1) * std::cos(k * 0.4) - 0.5 * std::cos(k * 2.2);
    EXPECT_NEAR(std::abs(s.s[k] - want), 0.0, 1e-11);
  }
}

TEST(MatrixPencil, RecoversNodes) {
  std::mt19937_64 rng(4);
  const auto m = random_spikes(rng, 6, 64, 4.0);
  const auto pr = matrix_pencil(recast_moments(moments_of_dirac(m, {BasisKind::chebyshev, 64})));
  EXPECT_EQ(pr.rank, 12);  // each cosine is two exponentials
  ASSERT_EQ(pr.t.size(), 6u);
  std::vector<double> want;
  for (const auto& a : m.atoms()) want.push_back(std::acos(a.location));
  std::sort(want.begin(), want.end());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(pr.t[i], want[i], 1e-9);
}

TEST(SolveCoefficients, ExactWeights) {
  DiracMeasure m({{-0.3, cdouble(0, 2)}, {0.6, 1.5}});
  const MomentVector y = moments_of_dirac(m, {BasisKind::monomial, 10});
  const std::vector<double> loc{-0.3, 0.6};
  const auto fit = solve_coefficients(loc, y);
  EXPECT_NEAR(std::abs(fit.weights[0] - cdouble(0, 2)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(fit.weights[1] - 1.5), 0.0, 1e-12);
  EXPECT_LT(fit.residual, 1e-13);
}

TEST(RecoverSpikes, PencilExactInEveryBasis) {
  std::mt19937_64 rng(9);
  for (auto kind : {BasisKind::chebyshev, BasisKind::legendre}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto m = random_spikes(rng, 10, 128, 4.0);
      const auto sol = recover_spikes(moments_of_dirac(m, {kind, 128}));
      expect_same(sol.measure, m, 1e-8, 1e-6);
      EXPECT_EQ(sol.model_order, 20);
      EXPECT_LT(sol.residual, 1e-10);
    }
  }
  const auto m = random_spikes(rng, 4, 24, 4.0);
  expect_same(recover_spikes(moments_of_dirac(m, {BasisKind::monomial, 24})).measure, m, 1e-7, 1e-5);
}

TEST(RecoverSpikes, EmptyAndZeroData) {
  const MomentVector y({BasisKind::chebyshev, 16}, Eigen::VectorXcd::Zero(17));
  const auto sol = recover_spikes(y);
  EXPECT_TRUE(sol.measure.empty());
}

TEST(RecoverSpikes, OrderCapEnforced) {
  std::mt19937_64 rng(12);
  const auto m = random_spikes(rng, 6, 64, 4.0);
  SolverOptions o;
  o.max_model_order = 3;
  EXPECT_POLYSR_ERROR(recover_spikes(moments_of_dirac(m, {BasisKind::chebyshev, 64}), o),
                      ErrorCode::order_estimation);
}

TEST(LpGrid, UniformInAngle) {
  const auto g = lp_grid(5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_NEAR(g[2], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(g[4], -1.0);
}

TEST(TvLp, OnGridRealExact) {
  const int N = 32, G = 16 * N + 1;
  std::mt19937_64 rng(13);
  std::vector<Atom> atoms;
  for (int j : {100, 180, 300, 420}) {
    const double w = (test::uniform(rng) < 0.5 ? -1 : 1) * (0.5 + test::uniform(rng));
    atoms.push_back({std::cos(kPi * j / (G - 1)), w});
  }
  const DiracMeasure m(atoms);
  SolverOptions o;
  o.method = SolverMethod::lp;
  const auto sol = tv_lp_recover(moments_of_dirac(m, {BasisKind::chebyshev, N}), o);
  EXPECT_EQ(sol.lp_grid_size, G);
  expect_same(sol.measure, m, 1e-9, 1e-6);
  EXPECT_LE(sol.lp_objective, tv_norm(m) + 1e-7);
  // dispatch through recover_spikes as well
  expect_same(recover_spikes(moments_of_dirac(m, {BasisKind::chebyshev, N}), o).measure, m, 1e-9, 1e-6);
}

TEST(TvLp, RejectsComplexMoments) {
  DiracMeasure m({{0.1, cdouble(0, 1)}});
  SolverOptions o;
  o.method = SolverMethod::lp;
  EXPECT_POLYSR_ERROR(tv_lp_recover(moments_of_dirac(m, {BasisKind::chebyshev, 16}), o),
                      ErrorCode::validation);
}
