#include "polysr/spike_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "polysr/error.hpp"

namespace polysr {

namespace {

constexpr double kPi = std::numbers::pi;
// Pencil nodes whose argument is this close to 0 or pi are real nodes.
constexpr double kRealNodeTol = 1e-9;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double relative_residual(const Eigen::VectorXcd& r, const Eigen::VectorXcd& y) {
  const double ny = y.norm();
  return ny > 0.0 ? r.norm() / ny : r.norm();
}

}  // namespace

std::string_view to_string(SolverMethod m) noexcept {
  return m == SolverMethod::pencil ? "pencil" : "lp";
}

SolverMethod parse_solver_method(std::string_view name) {
  if (name == "pencil") return SolverMethod::pencil;
  if (name == "lp") return SolverMethod::lp;
  throw Error(ErrorCode::validation, "unknown method '" + std::string(name) + "'");
}

void SolverOptions::validate() const {
  if (lp_grid_size != 0 && lp_grid_size < 2)
    throw Error(ErrorCode::validation, "lp_grid_size must be at least 2");
  if (!(pencil_rank_tol > 0.0) || !(coefficient_tol > 0.0) || !(residual_tol > 0.0) ||
      !(lp_active_tol > 0.0))
    throw Error(ErrorCode::validation, "solver tolerances must be positive");
  if (max_model_order < 0) throw Error(ErrorCode::validation, "max_model_order must be >= 0");
  if (endpoint_annihilation < 0)
    throw Error(ErrorCode::validation, "endpoint_annihilation must be >= 0");
}

RecastMoments recast_moments(const MomentVector& y) {
  RecastMoments out;
  out.N = y.N();
  if (y.basis.kind == BasisKind::monomial && y.N() > 64) {
    std::ostringstream msg;
    msg << "monomial moments with N = " << y.N() << " > 64 lose accuracy in conversion";
    out.warnings.push_back(msg.str());
  }
  out.s = change_of_basis(y, BasisSpec{BasisKind::chebyshev, y.N()}).values;
  return out;
}

PencilResult matrix_pencil(const RecastMoments& rec, const SolverOptions& opts) {
  opts.validate();
  const int N = rec.N;
  if (rec.s.size() != N + 1) throw Error(ErrorCode::shape, "recast moments have wrong length");
  const int cap_default = std::max((N - 1) / 2, 0);
  const int cap = opts.max_model_order > 0 ? opts.max_model_order : cap_default;
  if (N < 2 * cap + 1) {
    std::ostringstream msg;
    msg << "max_model_order " << cap << " needs N >= " << 2 * cap + 1;
    throw Error(ErrorCode::validation, msg.str());
  }
  const int D = opts.endpoint_annihilation;
  const int L = 2 * N + 1 - 2 * D;
  if (L < 3) throw Error(ErrorCode::validation, "endpoint annihilation order too large for N");

  // u_k = s_|k| for k = -N..N, stored at k + N.
  Eigen::VectorXcd u(2 * N + 1);
  for (int k = -N; k <= N; ++k) u[k + N] = rec.s[std::abs(k)];
  Eigen::VectorXcd v(L);
  for (int i = 0; i < L; ++i) {
    cdouble acc = 0.0;
    for (int j = 0; j <= D; ++j)
      acc += (j % 2 == 0 ? 1.0 : -1.0) * binomial(D, j) * u[i + 2 * D - 2 * j];
    v[i] = acc;
  }

  const int P = (L + 1) / 2;
  const int Q = L + 1 - P;
  Eigen::MatrixXcd H(P, Q);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < Q; ++j) H(i, j) = v[i + j];

  PencilResult out;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU);
  const Eigen::VectorXd sv = svd.singularValues();
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  if (sv.size() == 0 || sv[0] == 0.0) return out;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > opts.pencil_rank_tol * sv[0]) ++rank;
  out.rank = rank;
  if (rank > 2 * cap || rank > P - 1) {
    std::ostringstream msg;
    msg << "estimated model order " << rank << " exceeds the cap " << std::min(2 * cap, P - 1);
    throw Error(ErrorCode::order_estimation, msg.str());
  }

  const Eigen::MatrixXcd U = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXcd U0 = U.topRows(P - 1);
  const Eigen::MatrixXcd U1 = U.bottomRows(P - 1);
  const Eigen::MatrixXcd phi = U0.colPivHouseholderQr().solve(U1);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(phi, false);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::ill_posed, "pencil eigenvalue computation failed");

  bool has_zero = false, has_pi = false;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const cdouble z = eig.eigenvalues()[i];
    if (std::abs(std::abs(z) - 1.0) > 0.1) {
      std::ostringstream msg;
      msg << "pencil node " << z << " lies " << std::abs(std::abs(z) - 1.0)
          << " from the unit circle";
      throw Error(ErrorCode::ill_posed, msg.str());
    }
    const double a = std::arg(z);
    if (std::abs(a) <= kRealNodeTol) {
      has_zero = true;
    } else if (std::abs(a) >= kPi - kRealNodeTol) {
      has_pi = true;
    } else if (a > 0.0) {
      out.t.push_back(a);
    }
  }
  if (has_zero) out.t.push_back(0.0);
  if (has_pi) out.t.push_back(kPi);
  std::sort(out.t.begin(), out.t.end());
  return out;
}

CoefficientFit solve_coefficients(std::span<const double> locations, const MomentVector& y) {
  CoefficientFit out;
  const auto M = static_cast<Eigen::Index>(locations.size());
  if (M == 0) {
    out.residual = relative_residual(-y.values, y.values);
    return out;
  }
  if (M > y.N() + 1) {
    std::ostringstream msg;
    msg << M << " locations exceed the " << y.N() + 1 << " available moments";
    throw Error(ErrorCode::degenerate_locations, msg.str());
  }
  const Eigen::MatrixXcd A = collocation_matrix(y.basis, locations).cast<cdouble>();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
  if (qr.rank() < M) {
    std::ostringstream msg;
    msg << "collocation matrix has rank " << qr.rank() << " < " << M;
    throw Error(ErrorCode::degenerate_locations, msg.str());
  }
  const Eigen::VectorXcd c = qr.solve(y.values);
  out.weights.assign(c.data(), c.data() + c.size());
  out.residual = relative_residual(A * c - y.values, y.values);
  return out;
}

namespace {

SpikeSolution pencil_recover(const MomentVector& y, const SolverOptions& opts) {
  SpikeSolution out;
  RecastMoments rec = recast_moments(y);
  out.warnings = rec.warnings;
  const MomentVector cheb(BasisSpec{BasisKind::chebyshev, y.N()}, rec.s);
  const double scale = rec.s.cwiseAbs().maxCoeff();
  if (scale == 0.0) return out;

  const PencilResult pr = matrix_pencil(rec, opts);
  out.model_order = pr.rank;
  std::vector<double> x;
  for (auto it = pr.t.rbegin(); it != pr.t.rend(); ++it) x.push_back(std::cos(*it));
  CoefficientFit fit = solve_coefficients(x, cheb);

  std::vector<double> kept;
  for (std::size_t m = 0; m < x.size(); ++m)
    if (std::abs(fit.weights[m]) >= opts.coefficient_tol * scale) kept.push_back(x[m]);
  if (kept.size() != x.size()) {
    x = std::move(kept);
    fit = solve_coefficients(x, cheb);
  }

  std::vector<Atom> atoms;
  for (std::size_t m = 0; m < x.size(); ++m) atoms.push_back({x[m], fit.weights[m]});
  out.measure = DiracMeasure(std::move(atoms));
  out.residual = fit.residual;
  if (out.residual > opts.residual_tol) {
    std::ostringstream msg;
    msg << "forward residual " << out.residual << " exceeds " << opts.residual_tol;
    throw Error(ErrorCode::inconsistent, msg.str());
  }
  return out;
}

}  // namespace

std::vector<double> lp_grid(int grid_size) {
  if (grid_size < 2) throw Error(ErrorCode::validation, "lp_grid_size must be at least 2");
  std::vector<double> x(grid_size);
  for (int j = 0; j < grid_size; ++j) x[j] = std::cos(kPi * j / (grid_size - 1));
  x.front() = 1.0;
  x.back() = -1.0;
  return x;
}

SpikeSolution tv_lp_recover(const MomentVector& y, const SolverOptions& opts) {
  opts.validate();
  const int N = y.N();
  SpikeSolution out;
  RecastMoments rec = recast_moments(y);
  out.warnings = rec.warnings;
  const double scale = rec.s.cwiseAbs().maxCoeff();
  if (rec.s.imag().cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
    throw Error(ErrorCode::validation, "the LP path requires real moments; use the pencil path");
  const int G = opts.lp_grid_size > 0 ? opts.lp_grid_size : 16 * N + 1;
  out.lp_grid_size = G;
  if (scale == 0.0) return out;

  const std::vector<double> grid = lp_grid(G);
  const Eigen::VectorXd b = rec.s.real() / scale;
  const DenseLpOperator base(collocation_matrix(BasisSpec{BasisKind::chebyshev, N}, grid));

  LpResult lp;
  Eigen::VectorXd c(G);
  if (opts.lp_nonnegative) {
    lp = solve_lp(base, Eigen::VectorXd::Ones(G), b, opts.lp);
    c = lp.x;
  } else {
    const SplitLpOperator split(base);
    lp = solve_lp(split, Eigen::VectorXd::Ones(2 * G), b, opts.lp);
    c = lp.x.head(G) - lp.x.tail(G);
  }
  out.lp_iterations = lp.iterations;
  if (lp.status == LpStatus::infeasible) {
    std::ostringstream msg;
    msg << "moments are not reproducible on the grid (residual " << lp.primal_residual << ")";
    throw Error(ErrorCode::infeasible, msg.str());
  }
  if (lp.status == LpStatus::iteration_limit)
    throw Error(ErrorCode::nonconvergence, "LP iteration limit reached");
  out.lp_objective = c.cwiseAbs().sum() * scale;

  const double cmax = c.cwiseAbs().maxCoeff();
  // Runs of adjacent same-sign active grid points form one atom.
  const double keep = std::max(opts.lp_active_tol * cmax, opts.coefficient_tol);
  std::vector<Atom> atoms;
  int j = 0;
  while (j < G) {
    if (std::abs(c[j]) <= keep) {
      ++j;
      continue;
    }
    const double sign = c[j] > 0.0 ? 1.0 : -1.0;
    double mass = 0.0, weighted_t = 0.0, total = 0.0;
    while (j < G && std::abs(c[j]) > keep && c[j] * sign > 0.0) {
      const double t = kPi * j / (G - 1);
      mass += std::abs(c[j]);
      weighted_t += std::abs(c[j]) * t;
      total += c[j];
      ++j;
    }
    atoms.push_back({std::cos(weighted_t / mass), total * scale});
  }
  out.measure = DiracMeasure(std::move(atoms));

  const Eigen::VectorXcd fwd =
      moments_of_dirac(out.measure, BasisSpec{BasisKind::chebyshev, N}).values;
  out.residual = relative_residual(fwd - rec.s, rec.s);
  return out;
}

SpikeSolution recover_spikes(const MomentVector& y, const SolverOptions& opts) {
  opts.validate();
  if (opts.method == SolverMethod::lp) return tv_lp_recover(y, opts);
  return pencil_recover(y, opts);
}

}  // namespace polysr
