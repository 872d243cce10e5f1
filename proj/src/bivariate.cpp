#include "polysr/bivariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "polysr/certificate.hpp"
#include "polysr/error.hpp"

namespace polysr {

namespace {

constexpr double kPi = std::numbers::pi;

double max_rho(const Point2& a, const Point2& b) {
  return std::max(cheb_distance(a[0], b[0]), cheb_distance(a[1], b[1]));
}

// Row i holds cos(k t_i), k = 0..n-1.
Eigen::MatrixXd cosine_table(const Eigen::VectorXd& t, int n) {
  Eigen::MatrixXd c(t.size(), n);
  for (Eigen::Index i = 0; i < t.size(); ++i)
    for (int k = 0; k < n; ++k) c(i, k) = std::cos(k * t[i]);
  return c;
}

}  // namespace

DiracMeasure2D::DiracMeasure2D(std::vector<Atom2D> atoms) {
  atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                             [](const Atom2D& a) { return a.weight == 0.0; }),
              atoms.end());
  for (auto& a : atoms) {
    if (!std::isfinite(a.weight)) throw Error(ErrorCode::validation, "atom weight is not finite");
    for (auto& x : a.location) {
      if (!std::isfinite(x) || std::abs(x) > 1.0 + kDomainClamp) {
        std::ostringstream msg;
        msg << "atom coordinate " << x << " outside [-1,1]";
        throw Error(ErrorCode::domain, msg.str());
      }
      x = std::clamp(x, -1.0, 1.0);
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom2D& a, const Atom2D& b) { return a.location < b.location; });
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (atoms[j].location[0] - atoms[i].location[0] > kDuplicateTolerance) break;
      if (std::abs(atoms[j].location[1] - atoms[i].location[1]) <= kDuplicateTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "duplicate atom locations (" << atoms[i].location[0] << ", "
            << atoms[i].location[1] << ") and (" << atoms[j].location[0] << ", "
            << atoms[j].location[1] << ")";
        throw Error(ErrorCode::duplicate_location, msg.str());
      }
    }
  }
  atoms_ = std::move(atoms);
}

std::vector<Point2> DiracMeasure2D::locations() const {
  std::vector<Point2> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.location);
  return out;
}

std::vector<double> DiracMeasure2D::weights() const {
  std::vector<double> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.weight);
  return out;
}

double tv_norm(const DiracMeasure2D& m) {
  double s = 0.0;
  for (const auto& a : m.atoms()) s += std::abs(a.weight);
  return s;
}

double BivariatePoly::operator()(double x1, double x2) const {
  const BasisSpec cheb{BasisKind::chebyshev, N};
  return eval_basis_all(cheb, x1).dot(cheb_coeffs * eval_basis_all(cheb, x2));
}

SeparationReport2D check_separation_2d(std::span<const Point2> locations, int N,
                                       double threshold_factor) {
  if (N <= 0) throw Error(ErrorCode::validation, "N must be positive");
  if (!(threshold_factor > 0.0))
    throw Error(ErrorCode::validation, "threshold_factor must be positive");
  SeparationReport2D r;
  r.threshold_factor = threshold_factor;
  r.threshold = threshold_factor * kPi / N;
  r.below_guaranteed_regime = N < 512;
  r.min_pair_distance = std::numeric_limits<double>::infinity();
  if (threshold_factor < kSafeSeparationFactor2D) {
    std::ostringstream msg;
    msg << "factor " << threshold_factor << " is below the " << kSafeSeparationFactor2D
        << " pi/N used by the certificate construction; no recovery guarantee is claimed";
    r.note = msg.str();
  }
  const double t_lo = 2.0 * kPi / N, t_hi = kPi - t_lo;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (double x : locations[i]) {
      const double t = checked_acos(x);
      if (t < t_lo - kSeparationSlack || t > t_hi + kSeparationSlack) {
        r.domain_violations.push_back(i);
        break;
      }
    }
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (std::size_t j = i + 1; j < locations.size(); ++j) {
      const double d = max_rho(locations[i], locations[j]);
      r.min_pair_distance = std::min(r.min_pair_distance, d);
      if (d < r.threshold - kSeparationSlack) r.pair_violations.emplace_back(i, j);
    }
  }
  r.satisfied = r.domain_violations.empty() && r.pair_violations.empty();
  return r;
}

Eigen::MatrixXd moments_2d(const DiracMeasure2D& m, int N) {
  if (N < 0) throw Error(ErrorCode::validation, "N must be nonnegative");
  const BasisSpec cheb{BasisKind::chebyshev, N};
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (const auto& a : m.atoms()) {
    const Eigen::VectorXd p1 = eval_basis_all(cheb, a.location[0]);
    const Eigen::VectorXd p2 = eval_basis_all(cheb, a.location[1]);
    y.noalias() += a.weight * p1 * p2.transpose();
  }
  return y;
}

Eigen::MatrixXd moments_2d(const DiracMeasure2D& m, const BasisSpec& basis) {
  const Eigen::MatrixXd y = moments_2d(m, basis.N);
  if (basis.kind == BasisKind::chebyshev) return y;
  const Eigen::MatrixXd& c = conversion_matrix(BasisSpec{BasisKind::chebyshev, basis.N}, basis);
  return c * y * c.transpose();
}

CertificateBuild2D build_certificate_2d(std::span<const Point2> locations,
                                        std::span<const double> signs, int N,
                                        double threshold_factor, bool require_separation) {
  if (locations.size() != signs.size())
    throw Error(ErrorCode::shape, "location and sign sequences differ in length");
  if (locations.empty()) throw Error(ErrorCode::validation, "at least one location is required");
  for (double s : signs)
    if (s != 1.0 && s != -1.0) throw Error(ErrorCode::validation, "signs must be +1 or -1");

  CertificateBuild2D out;
  out.separation = check_separation_2d(locations, N, threshold_factor);
  if (require_separation && !out.separation.satisfied)
    throw Error(ErrorCode::separation, "locations violate the 2D separation condition");
  if (out.separation.below_guaranteed_regime)
    out.warnings.push_back("N below 512: outside the guaranteed regime");
  if (!out.separation.note.empty()) out.warnings.push_back(out.separation.note);

  // Four reflections of t~ = -arccos x per axis.
  std::vector<std::array<double, 2>> t;
  std::vector<double> u;
  for (std::size_t m = 0; m < locations.size(); ++m) {
    const double a = -checked_acos(locations[m][0]);
    const double b = -checked_acos(locations[m][1]);
    if (a == 0.0 || a == -kPi || b == 0.0 || b == -kPi) {
      std::ostringstream msg;
      msg << "location (" << locations[m][0] << ", " << locations[m][1]
          << ") coincides with its reflection";
      throw Error(ErrorCode::reflection_collision, msg.str());
    }
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0}) {
        t.push_back({s1 * a, s2 * b});
        u.push_back(signs[m]);
      }
  }

  const JacksonKernel kernel(N);
  const Eigen::Index p = static_cast<Eigen::Index>(t.size());
  // Unknowns [a; b1; b2] for K K, K' K, K K'; rows [value; d/dt1; d/dt2].
  Eigen::MatrixXd sys(3 * p, 3 * p);
  for (Eigen::Index q = 0; q < p; ++q) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double d1 = t[q][0] - t[j][0], d2 = t[q][1] - t[j][1];
      const double k0a = kernel.value(d1), k1a = kernel.d1(d1), k2a = kernel.d2(d1);
      const double k0b = kernel.value(d2), k1b = kernel.d1(d2), k2b = kernel.d2(d2);
      sys(q, j) = k0a * k0b;
      sys(q, p + j) = k1a * k0b;
      sys(q, 2 * p + j) = k0a * k1b;
      sys(p + q, j) = k1a * k0b;
      sys(p + q, p + j) = k2a * k0b;
      sys(p + q, 2 * p + j) = k1a * k1b;
      sys(2 * p + q, j) = k0a * k1b;
      sys(2 * p + q, p + j) = k1a * k1b;
      sys(2 * p + q, 2 * p + j) = k0a * k2b;
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * p);
  for (Eigen::Index q = 0; q < p; ++q) rhs[q] = u[q];

  Eigen::VectorXd scale(3 * p);
  for (Eigen::Index c = 0; c < 3 * p; ++c) {
    const double s = sys.col(c).cwiseAbs().maxCoeff();
    scale[c] = s > 0.0 ? 1.0 / s : 1.0;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys * scale.asDiagonal());
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "2D interpolation system is singular (rcond " << rcond << ")";
    throw Error(ErrorCode::construction, msg.str());
  }
  const Eigen::VectorXd sol = scale.asDiagonal() * lu.solve(rhs);
  out.kernel_degree = kernel.degree();
  out.condition_estimate = 1.0 / rcond;
  if (out.condition_estimate > 1e12) {
    std::ostringstream msg;
    msg << "interpolation system condition estimate " << out.condition_estimate
        << " exceeds 1e12";
    out.warnings.push_back(msg.str());
  }

  // Folding the four reflections leaves, per point,
  // g_k1 g_k2 [a cos cos + k1 b1 sin cos + k2 b2 cos sin] in (k1 s1, k2 s2);
  // one-sided cosine coefficients double every nonzero index.
  const int d = kernel.degree();
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(N + 1, 3 * p);
  Eigen::MatrixXd right = Eigen::MatrixXd::Zero(N + 1, 3 * p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (int k = 0; k <= d; ++k) {
      const double w = (k == 0 ? 1.0 : 2.0) * kernel.coeff(k);
      const double c1 = w * std::cos(k * t[j][0]), s1 = w * k * std::sin(k * t[j][0]);
      const double c2 = w * std::cos(k * t[j][1]), s2 = w * k * std::sin(k * t[j][1]);
      left(k, j) = sol[j] * c1;
      right(k, j) = c2;
      left(k, p + j) = sol[p + j] * s1;
      right(k, p + j) = c2;
      left(k, 2 * p + j) = sol[2 * p + j] * c1;
      right(k, 2 * p + j) = s2;
    }
  }
  out.poly = BivariatePoly{N, left * right.transpose()};
  return out;
}

CertificateReport2D verify_certificate_2d(const BivariatePoly& p,
                                          std::span<const Point2> locations,
                                          std::span<const double> signs,
                                          const VerifyOptions2D& options) {
  if (locations.size() != signs.size())
    throw Error(ErrorCode::shape, "location and sign sequences differ in length");
  if (options.grid_points_per_degree < 4)
    throw Error(ErrorCode::validation, "grid_points_per_degree must be at least 4");
  const int N = p.N;
  if (p.cheb_coeffs.rows() != N + 1 || p.cheb_coeffs.cols() != N + 1)
    throw Error(ErrorCode::shape, "coefficient matrix must be (N+1) x (N+1)");
  const int n_deg = std::max(N, 1);
  CertificateReport2D rep;
  rep.exclusion_radius =
      options.exclusion_radius >= 0.0 ? options.exclusion_radius : (4.0 * kPi / n_deg) / 100.0;
  rep.interp_tol = options.interp_tol;
  rep.eval_tol = options.eval_tol;

  for (std::size_t m = 0; m < locations.size(); ++m)
    rep.interpolation_residual = std::max(
        rep.interpolation_residual, std::abs(p(locations[m][0], locations[m][1]) - signs[m]));

  std::vector<Point2> knot_t(locations.size());
  for (std::size_t m = 0; m < locations.size(); ++m)
    knot_t[m] = {checked_acos(locations[m][0]), checked_acos(locations[m][1])};
  auto near_knot = [&](double a, double b) {
    for (const auto& k : knot_t)
      if (std::max(std::abs(a - k[0]), std::abs(b - k[1])) < rep.exclusion_radius) return true;
    return false;
  };
  auto record = [&](double a, double b, double v) {
    if (near_knot(a, b)) {
      rep.near_knot_max = std::max(rep.near_knot_max, v);
    } else if (v > rep.off_support_max) {
      rep.off_support_max = v;
      rep.off_support_argmax = {std::cos(a), std::cos(b)};
    }
  };

  const int g = options.grid_points_per_degree * n_deg;
  rep.grid_size = g;
  const double h = kPi / (g - 1);
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(g, 0.0, kPi);
  const Eigen::MatrixXd c = cosine_table(grid, N + 1);
  const Eigen::MatrixXd vals = (c * p.cheb_coeffs * c.transpose()).cwiseAbs();
  double grid_max = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      record(grid[i], grid[j], vals(i, j));
      if (!near_knot(grid[i], grid[j])) grid_max = std::max(grid_max, vals(i, j));
    }

  // A grid sample is within pi^2 / (4 gpd^2) of the nearby maximum (relative
  // to sup |P|), so only maxima above that margin below grid_max can matter.
  const double gpd = options.grid_points_per_degree;
  const double floor_value = grid_max * (1.0 - kPi * kPi / (4.0 * gpd * gpd));
  struct Candidate {
    double v;
    int i, j;
  };
  std::vector<Candidate> cand;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double v = vals(i, j);
      if (v < floor_value) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, b = j + dj;
          if ((di || dj) && a >= 0 && a < g && b >= 0 && b < g && vals(a, b) > v) {
            is_max = false;
            break;
          }
        }
      if (is_max) cand.push_back({v, i, j});
    }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.v != b.v) return a.v > b.v;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  if (cand.size() > static_cast<std::size_t>(options.max_refinements))
    cand.resize(options.max_refinements);

  const BasisSpec cheb{BasisKind::chebyshev, N};
  for (const auto& cd : cand) {
    double a = grid[cd.i], b = grid[cd.j];
    const double a_lo = std::max(0.0, a - h), a_hi = std::min(kPi, a + h);
    const double b_lo = std::max(0.0, b - h), b_hi = std::min(kPi, b + h);
    for (int sweep = 0; sweep < 6; ++sweep) {
      const Eigen::VectorXd w1 = p.cheb_coeffs * eval_basis_all(cheb, std::cos(b));
      a = golden_section_max(
          [&](double s) { return std::abs(eval_basis_all(cheb, std::cos(s)).dot(w1)); }, a_lo,
          a_hi, 1e-12);
      const Eigen::VectorXd w2 = p.cheb_coeffs.transpose() * eval_basis_all(cheb, std::cos(a));
      b = golden_section_max(
          [&](double s) { return std::abs(eval_basis_all(cheb, std::cos(s)).dot(w2)); }, b_lo,
          b_hi, 1e-12);
    }
    record(a, b, std::abs(p(std::cos(a), std::cos(b))));
    ++rep.refined_maxima;
  }

  rep.near_knot_ok = rep.near_knot_max <= 1.0 + options.eval_tol;
  rep.passed = rep.interpolation_residual <= options.interp_tol && rep.off_support_max < 1.0 &&
               rep.near_knot_ok;
  return rep;
}

KroneckerLpOperator::KroneckerLpOperator(int N, std::span<const double> grid)
    : n1_(N + 1), g_(static_cast<int>(grid.size())) {
  const BasisSpec cheb2{BasisKind::chebyshev, 2 * N};
  t2_ = collocation_matrix(cheb2, grid);
  t_ = t2_.topRows(N + 1);
}

Eigen::VectorXd KroneckerLpOperator::apply(const Eigen::VectorXd& x) const {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> xm(x.data(), g_, g_);
  RowMat y = t_ * xm * t_.transpose();
  return Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
}

Eigen::VectorXd KroneckerLpOperator::apply_transpose(const Eigen::VectorXd& y) const {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> ym(y.data(), n1_, n1_);
  RowMat x = t_.transpose() * ym * t_;
  return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

Eigen::MatrixXd KroneckerLpOperator::normal(const Eigen::VectorXd& d) const {
  // T_k T_l = (T_{k+l} + T_{|k-l|}) / 2 per axis, so every entry is a sum of
  // four weighted moments m(a, b) = sum d_ij T_a(x_i) T_b(x_j).
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> dm(d.data(), g_, g_);
  const Eigen::MatrixXd m = t2_ * dm * t2_.transpose();
  const Eigen::Index n = rows();
  Eigen::MatrixXd out(n, n);
  for (int k1 = 0; k1 < n1_; ++k1)
    for (int l1 = 0; l1 < n1_; ++l1) {
      const int s1 = k1 + l1, d1 = std::abs(k1 - l1);
      for (int k2 = 0; k2 < n1_; ++k2)
        for (int l2 = 0; l2 < n1_; ++l2) {
          const int s2 = k2 + l2, d2 = std::abs(k2 - l2);
          out(k1 * n1_ + k2, l1 * n1_ + l2) =
              0.25 * (m(s1, s2) + m(s1, d2) + m(d1, s2) + m(d1, d2));
        }
    }
  return out;
}

Eigen::MatrixXd KroneckerLpOperator::columns(const std::vector<Eigen::Index>& idx) const {
  Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const Eigen::Index i = idx[c] / g_, j = idx[c] % g_;
    for (int k1 = 0; k1 < n1_; ++k1)
      for (int k2 = 0; k2 < n1_; ++k2) out(k1 * n1_ + k2, c) = t_(k1, i) * t_(k2, j);
  }
  return out;
}

SpikeSolution2D recover_spikes_2d(const Eigen::MatrixXd& y, const SolverOptions& opts) {
  opts.validate();
  if (y.rows() != y.cols() || y.rows() < 1)
    throw Error(ErrorCode::shape, "2D moments must form a square (N+1) x (N+1) matrix");
  if (!y.allFinite()) throw Error(ErrorCode::validation, "2D moments contain non-finite values");
  const int N = static_cast<int>(y.rows()) - 1;
  SpikeSolution2D out;
  if (N < 512) out.warnings.push_back("N below 512: outside the guaranteed regime");
  const int G = opts.lp_grid_size > 0 ? opts.lp_grid_size : 2 * N + 1;
  out.lp_grid_size = G;
  const double scale = y.cwiseAbs().maxCoeff();
  if (scale == 0.0) return out;

  const std::vector<double> grid = lp_grid(G);
  const KroneckerLpOperator base(N, grid);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat yr = y / scale;
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(yr.data(), yr.size());
  const Eigen::Index n = base.cols();

  LpResult lp;
  Eigen::VectorXd c(n);
  if (opts.lp_nonnegative) {
    lp = solve_lp(base, Eigen::VectorXd::Ones(n), b, opts.lp);
    c = lp.x;
  } else {
    const SplitLpOperator split(base);
    lp = solve_lp(split, Eigen::VectorXd::Ones(2 * n), b, opts.lp);
    c = lp.x.head(n) - lp.x.tail(n);
  }
  out.lp_iterations = lp.iterations;
  if (lp.status == LpStatus::infeasible) {
    std::ostringstream msg;
    msg << "2D moments are not reproducible on the grid (residual " << lp.primal_residual << ")";
    throw Error(ErrorCode::infeasible, msg.str());
  }
  if (lp.status == LpStatus::iteration_limit)
    throw Error(ErrorCode::nonconvergence, "LP iteration limit reached");
  out.lp_objective = c.cwiseAbs().sum() * scale;

  // 8-connected same-sign components of active cells become one atom each.
  const double cmax = c.cwiseAbs().maxCoeff();
  const double keep = std::max(opts.lp_active_tol * cmax, opts.coefficient_tol);
  std::vector<char> seen(n, 0);
  std::vector<Atom2D> atoms;
  for (Eigen::Index start = 0; start < n; ++start) {
    if (seen[start] || std::abs(c[start]) <= keep) continue;
    const double sign = c[start] > 0.0 ? 1.0 : -1.0;
    std::vector<Eigen::Index> stack{start};
    seen[start] = 1;
    double mass = 0.0, total = 0.0, ta = 0.0, tb = 0.0;
    while (!stack.empty()) {
      const Eigen::Index cur = stack.back();
      stack.pop_back();
      const int i = static_cast<int>(cur / G), j = static_cast<int>(cur % G);
      const double w = std::abs(c[cur]);
      mass += w;
      total += c[cur];
      ta += w * kPi * i / (G - 1);
      tb += w * kPi * j / (G - 1);
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, bb = j + dj;
          if (a < 0 || a >= G || bb < 0 || bb >= G) continue;
          const Eigen::Index nb = static_cast<Eigen::Index>(a) * G + bb;
          if (seen[nb] || std::abs(c[nb]) <= keep || c[nb] * sign <= 0.0) continue;
          seen[nb] = 1;
          stack.push_back(nb);
        }
    }
    atoms.push_back({{std::cos(ta / mass), std::cos(tb / mass)}, total * scale});
  }
  out.measure = DiracMeasure2D(std::move(atoms));
  const double ny = y.norm();
  out.residual = (moments_2d(out.measure, N) - y).norm() / ny;
  return out;
}

}  // namespace polysr
