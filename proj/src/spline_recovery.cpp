#include "polysr/spline_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "polysr/error.hpp"

namespace polysr {

namespace {

constexpr double kMomentAcceptTol = 1e-6;
constexpr double kBoundaryAcceptTol = 1e-8;
// A refined candidate this good ends the model search.
constexpr double kEarlyAcceptTol = 1e-10;
constexpr double kKnotMargin = 1e-12;
constexpr double kMergeDistance = 1e-7;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Forward model of a degree-r spline with fixed left boundary data, in the
// Chebyshev basis: f = L + sum_m d_m (x - x_m)_+^r / r!.
class TruncatedPowerModel {
 public:
  TruncatedPowerModel(int N, int r, std::span<const cdouble> left)
      : N_(N), r_(r), cheb_{BasisKind::chebyshev, N},
        rule_(gauss_legendre((N + r) / 2 + 2)) {
    const Spline base = integrate_back(DiracMeasure{}, left, r);
    base_moments_ = moments_of_spline(base, cheb_).values;
    base_right_.resize(r + 1);
    for (int i = 0; i <= r; ++i) base_right_(i) = base.boundary_right()[i];
  }

  int N() const noexcept { return N_; }
  int degree() const noexcept { return r_; }
  const Eigen::VectorXcd& base_moments() const noexcept { return base_moments_; }
  const Eigen::VectorXcd& base_right() const noexcept { return base_right_; }

  // Moments of (x - a)_+^p / p! on [a, 1]; p = -1 means delta_a.
  Eigen::VectorXd truncated_moments(double a, int p) const {
    if (p < 0) return eval_basis_all(cheb_, a);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(N_ + 1);
    const double half = 0.5 * (1.0 - a);
    const double fp = factorial(p);
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
      const double x = a + half * (rule_.nodes[i] + 1.0);
      const double w = rule_.weights[i] * half * std::pow(x - a, p) / fp;
      out += w * eval_basis_all(cheb_, x);
    }
    return out;
  }

  // Right boundary derivatives i = 0..r of (x - a)_+^p / p! at x = 1.
  Eigen::VectorXd truncated_right(double a, int p) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(r_ + 1);
    for (int i = 0; i <= r_ && i <= p; ++i)
      out(i) = std::pow(1.0 - a, p - i) / factorial(p - i);
    return out;
  }

 private:
  int N_;
  int r_;
  BasisSpec cheb_;
  QuadratureRule rule_;
  Eigen::VectorXcd base_moments_;
  Eigen::VectorXcd base_right_;
};

struct Fit {
  std::vector<double> knots;
  std::vector<cdouble> jumps;
  double moment_residual = std::numeric_limits<double>::infinity();
  double boundary_residual = std::numeric_limits<double>::infinity();
};

class Refiner {
 public:
  Refiner(const TruncatedPowerModel& model, const Eigen::VectorXcd& target,
          const std::vector<cdouble>& right)
      : model_(model), target_(target), right_(right.size()) {
    for (std::size_t i = 0; i < right.size(); ++i) right_(i) = right[i];
    const double ny = target_.norm();
    moment_weight_ = ny > 0.0 ? 1.0 / ny : 1.0;
    boundary_weight_ = 1.0 / std::max(1.0, right_.cwiseAbs().maxCoeff());
  }

  // Complex residual rows: weighted moment mismatch then boundary mismatch.
  Eigen::VectorXcd residual(const std::vector<double>& x, const std::vector<cdouble>& d) const {
    const int N = model_.N(), r = model_.degree();
    Eigen::VectorXcd mom = model_.base_moments() - target_;
    Eigen::VectorXcd bnd = model_.base_right() - right_;
    for (std::size_t m = 0; m < x.size(); ++m) {
      mom += d[m] * model_.truncated_moments(x[m], r).cast<cdouble>();
      bnd += d[m] * model_.truncated_right(x[m], r).cast<cdouble>();
    }
    Eigen::VectorXcd out(N + 1 + r + 1);
    out << moment_weight_ * mom, boundary_weight_ * bnd;
    return out;
  }

  void score(Fit& f) const {
    const int N = model_.N();
    const Eigen::VectorXcd e = residual(f.knots, f.jumps);
    f.moment_residual = e.head(N + 1).norm();
    f.boundary_residual = e.tail(model_.degree() + 1).cwiseAbs().maxCoeff() / boundary_weight_;
  }

  // Jumps by linear least squares at fixed knots.
  std::vector<cdouble> fit_jumps(const std::vector<double>& x) const {
    const int N = model_.N(), r = model_.degree();
    const Eigen::Index rows = N + 1 + r + 1;
    Eigen::MatrixXcd g(rows, static_cast<Eigen::Index>(x.size()));
    for (std::size_t m = 0; m < x.size(); ++m) {
      g.col(m) << moment_weight_ * model_.truncated_moments(x[m], r).cast<cdouble>(),
          boundary_weight_ * model_.truncated_right(x[m], r).cast<cdouble>();
    }
    Eigen::VectorXcd rhs(rows);
    rhs << moment_weight_ * (target_ - model_.base_moments()),
        boundary_weight_ * (right_ - model_.base_right());
    const Eigen::VectorXcd d = g.colPivHouseholderQr().solve(rhs);
    return {d.data(), d.data() + d.size()};
  }

  // Levenberg-Marquardt on knots and (real, imaginary) jumps.
  void refine(Fit& f, int max_iterations = 80) const {
    const int N = model_.N(), r = model_.degree();
    const std::size_t M = f.knots.size();
    if (M == 0) {
      score(f);
      return;
    }
    const Eigen::Index crow = N + 1 + r + 1;
    auto cost_of = [](const Eigen::VectorXcd& e) { return e.squaredNorm(); };
    Eigen::VectorXcd e = residual(f.knots, f.jumps);
    double cost = cost_of(e);
    double lambda = 1e-3;
    for (int it = 0; it < max_iterations && cost > 1e-32; ++it) {
      Eigen::MatrixXcd jc(crow, 3 * static_cast<Eigen::Index>(M));
      for (std::size_t m = 0; m < M; ++m) {
        Eigen::VectorXcd g(crow), dg(crow);
        g << moment_weight_ * model_.truncated_moments(f.knots[m], r).cast<cdouble>(),
            boundary_weight_ * model_.truncated_right(f.knots[m], r).cast<cdouble>();
        dg << -moment_weight_ * model_.truncated_moments(f.knots[m], r - 1).cast<cdouble>(),
            -boundary_weight_ * model_.truncated_right(f.knots[m], r - 1).cast<cdouble>();
        jc.col(m) = f.jumps[m] * dg;
        jc.col(M + m) = g;
        jc.col(2 * M + m) = cdouble(0.0, 1.0) * g;
      }
      Eigen::MatrixXd j(2 * crow, jc.cols());
      j << jc.real(), jc.imag();
      Eigen::VectorXd res(2 * crow);
      res << e.real(), e.imag();
      const Eigen::MatrixXd jtj = j.transpose() * j;
      const Eigen::VectorXd grad = j.transpose() * res;
      bool improved = false;
      for (int tries = 0; tries < 12; ++tries) {
        Eigen::MatrixXd a = jtj;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
          a(i, i) += lambda * std::max(jtj(i, i), 1e-30);
        const Eigen::VectorXd step = a.ldlt().solve(-grad);
        if (!step.allFinite()) {
          lambda *= 10.0;
          continue;
        }
        Fit trial = f;
        bool ok = true;
        for (std::size_t m = 0; m < M; ++m) {
          trial.knots[m] += step(m);
          trial.jumps[m] += cdouble(step(M + m), step(2 * M + m));
          if (!(std::abs(trial.knots[m]) < 1.0 - kKnotMargin)) ok = false;
          if (m > 0 && !(trial.knots[m] > trial.knots[m - 1])) ok = false;
        }
        if (ok) {
          const Eigen::VectorXcd te = residual(trial.knots, trial.jumps);
          const double tc = cost_of(te);
          if (tc < cost) {
            const double drop = cost - tc;
            f.knots = std::move(trial.knots);
            f.jumps = std::move(trial.jumps);
            e = te;
            cost = tc;
            lambda = std::max(lambda / 5.0, 1e-12);
            improved = drop > 1e-14 * cost || step.norm() > 1e-15;
            break;
          }
        }
        lambda *= 8.0;
      }
      if (!improved) break;
    }
    score(f);
  }

  // Merges knots that collapsed onto each other, drops jumps negligible
  // relative to the largest. True when anything changed.
  bool prune(Fit& f, double tol) const {
    Fit merged;
    for (std::size_t m = 0; m < f.knots.size(); ++m) {
      if (!merged.knots.empty() && f.knots[m] - merged.knots.back() < kMergeDistance) {
        merged.jumps.back() += f.jumps[m];
        continue;
      }
      merged.knots.push_back(f.knots[m]);
      merged.jumps.push_back(f.jumps[m]);
    }
    double dmax = 0.0;
    for (const auto& d : merged.jumps) dmax = std::max(dmax, std::abs(d));
    Fit kept;
    for (std::size_t m = 0; m < merged.knots.size(); ++m) {
      if (std::abs(merged.jumps[m]) > tol * dmax) {
        kept.knots.push_back(merged.knots[m]);
        kept.jumps.push_back(merged.jumps[m]);
      }
    }
    if (kept.knots.size() == f.knots.size()) return false;
    f = std::move(kept);
    return true;
  }

 private:
  const TruncatedPowerModel& model_;
  Eigen::VectorXcd target_;
  Eigen::VectorXcd right_;
  double moment_weight_ = 1.0;
  double boundary_weight_ = 1.0;
};

std::vector<double> interior_knots(std::span<const double> xs) {
  std::vector<double> out;
  for (double x : xs)
    if (std::abs(x) < 1.0 - 1e-9) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return b - a < 1e-12; }),
            out.end());
  return out;
}

bool better(const Fit& a, const Fit& b) {
  const double sa = a.moment_residual + a.boundary_residual;
  const double sb = b.moment_residual + b.boundary_residual;
  if (!std::isfinite(sb)) return std::isfinite(sa);
  return sa < sb;
}

}  // namespace

void SplineProblem::validate() const {
  if (degree < 0) throw Error(ErrorCode::validation, "spline degree must be nonnegative");
  if (N() < 1) throw Error(ErrorCode::validation, "spline recovery needs N >= 1");
  if (y.values.size() != N() + 1)
    throw Error(ErrorCode::shape, "moment vector length does not match N + 1");
  const auto need = static_cast<std::size_t>(degree) + 1;
  if (boundary_left.size() != need || boundary_right.size() != need) {
    std::ostringstream msg;
    msg << "boundary sequences must hold f^(j)(+-1) for j = 0.." << degree << " ("
        << need << " values each)";
    throw Error(ErrorCode::validation, msg.str());
  }
  auto finite = [](cdouble v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
  if (!y.values.allFinite() || !std::all_of(boundary_left.begin(), boundary_left.end(), finite) ||
      !std::all_of(boundary_right.begin(), boundary_right.end(), finite))
    throw Error(ErrorCode::validation, "spline problem contains non-finite values");
}

MomentVector derivative_moments(const MomentVector& y, cdouble left_value, cdouble right_value) {
  const BasisSpec& b = y.basis;
  const Eigen::MatrixXd& alpha = derivative_matrix(b).entries;
  const Eigen::VectorXd p_right = eval_basis_all(b, 1.0);
  const Eigen::VectorXd p_left = eval_basis_all(b, -1.0);
  Eigen::VectorXcd out = right_value * p_right.cast<cdouble>() -
                         left_value * p_left.cast<cdouble>() - alpha.cast<cdouble>() * y.values;
  return MomentVector(b, std::move(out));
}

Spline integrate_back(const DiracMeasure& jumps, std::span<const cdouble> boundary_left,
                      int degree) {
  if (degree < 0) throw Error(ErrorCode::validation, "spline degree must be nonnegative");
  if (boundary_left.size() != static_cast<std::size_t>(degree) + 1)
    throw Error(ErrorCode::validation, "boundary_left must hold degree + 1 values");
  std::vector<Atom> atoms(jumps.atoms().begin(), jumps.atoms().end());
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  const std::size_t M = atoms.size();
  std::vector<double> knots(M);
  for (std::size_t m = 0; m < M; ++m) knots[m] = atoms[m].location;

  // f^(r): piecewise constant, jumping by the atom weights.
  std::vector<MonomialPoly> cur(M + 1);
  cur[0] = {boundary_left[degree]};
  for (std::size_t m = 0; m < M; ++m) cur[m + 1] = {cur[m][0] + atoms[m].weight};

  for (int j = degree - 1; j >= 0; --j) {
    std::vector<MonomialPoly> next(M + 1);
    next[0] = antiderivative(cur[0]);
    next[0][0] += boundary_left[j] - horner(next[0], -1.0);
    for (std::size_t m = 0; m < M; ++m) {
      next[m + 1] = antiderivative(cur[m + 1]);
      next[m + 1][0] += horner(next[m], knots[m]) - horner(next[m + 1], knots[m]);
    }
    cur = std::move(next);
  }
  return Spline(degree, std::move(knots), std::move(cur));
}

ConsistencyReport consistency_check(const Spline& s, const SplineProblem& p) {
  ConsistencyReport rep;
  const MomentVector m = moments_of_spline(s, p.y.basis);
  const double ny = p.y.values.norm();
  const double diff = (m.values - p.y.values).norm();
  rep.moment_residual = ny > 0.0 ? diff / ny : diff;
  for (std::size_t j = 0; j < p.boundary_left.size(); ++j)
    rep.boundary_left_residual = std::max(
        rep.boundary_left_residual, std::abs(s.derivative(-1.0, static_cast<int>(j)) -
                                             p.boundary_left[j]));
  for (std::size_t j = 0; j < p.boundary_right.size(); ++j)
    rep.boundary_right_residual = std::max(
        rep.boundary_right_residual, std::abs(s.derivative(1.0, static_cast<int>(j)) -
                                              p.boundary_right[j]));
  rep.continuity_residual = s.continuity_residual();
  return rep;
}

SplineSolution recover_spline(const SplineProblem& p, const SolverOptions& opts) {
  p.validate();
  opts.validate();
  const int N = p.N(), r = p.degree;
  std::vector<std::string> warnings;
  if (N < 128) {
    std::ostringstream msg;
    msg << "N = " << N << " is below 128; recovery is outside the guaranteed regime";
    warnings.push_back(msg.str());
  }

  const BasisSpec cheb{BasisKind::chebyshev, N};
  const MomentVector yc = change_of_basis(p.y, cheb);
  MomentVector z = yc;
  for (int j = 0; j <= r; ++j) z = derivative_moments(z, p.boundary_left[j], p.boundary_right[j]);

  const TruncatedPowerModel model(N, r, p.boundary_left);
  const Refiner refiner(model, yc.values, p.boundary_right);

  Fit best;
  {
    Fit none;
    refiner.score(none);
    best = none;
  }
  auto accept = [](const Fit& f) {
    return f.moment_residual <= kEarlyAcceptTol && f.boundary_residual <= kBoundaryAcceptTol;
  };

  auto try_knots = [&](std::vector<double> xs) {
    if (xs.empty()) return;
    Fit f;
    f.knots = std::move(xs);
    f.jumps = refiner.fit_jumps(f.knots);
    refiner.refine(f);
    if (refiner.prune(f, opts.coefficient_tol)) {
      f.jumps = refiner.fit_jumps(f.knots);
      refiner.refine(f);
    }
    if (better(f, best)) best = std::move(f);
  };

  if (!accept(best)) {
    const RecastMoments rec = recast_moments(z);
    if (opts.method == SolverMethod::lp) {
      try {
        const SpikeSolution sol = tv_lp_recover(z, opts);
        try_knots(interior_knots(sol.measure.locations()));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::validation) throw;
        warnings.push_back(std::string("LP knot search failed: ") + e.what());
      }
    } else {
      std::vector<int> orders;
      if (opts.endpoint_annihilation > 0) orders.push_back(opts.endpoint_annihilation);
      for (int d : {r == 0 ? 0 : r + 2, r + 1, 0})
        if (std::find(orders.begin(), orders.end(), d) == orders.end()) orders.push_back(d);
      std::vector<double> tols{opts.pencil_rank_tol};
      for (double t : {1e-8, 1e-6, 1e-4, 1e-3})
        if (std::find(tols.begin(), tols.end(), t) == tols.end()) tols.push_back(t);

      std::optional<Error> last_error;
      for (int d : orders) {
        if (2 * N + 1 - 2 * d < 3) continue;
        for (double tol : tols) {
          SolverOptions po = opts;
          po.endpoint_annihilation = d;
          po.pencil_rank_tol = tol;
          try {
            const PencilResult pr = matrix_pencil(rec, po);
            std::vector<double> xs;
            for (double t : pr.t) xs.push_back(std::cos(t));
            try_knots(interior_knots(xs));
          } catch (const Error& e) {
            last_error = e;
          }
          if (accept(best)) break;
        }
        if (accept(best)) break;
      }
      if (!std::isfinite(best.moment_residual) && last_error) throw *last_error;
    }
  }

  std::vector<Atom> atoms;
  for (std::size_t m = 0; m < best.knots.size(); ++m)
    atoms.push_back({best.knots[m], best.jumps[m]});
  DiracMeasure jumps(std::move(atoms));
  Spline s = integrate_back(jumps, p.boundary_left, r);
  ConsistencyReport rep = consistency_check(s, p);
  if (!(rep.moment_residual <= kMomentAcceptTol) ||
      !(rep.boundary_right_residual <= kBoundaryAcceptTol)) {
    std::ostringstream msg;
    msg << "recovered spline fails the forward check: moment residual "
        << rep.moment_residual << ", right boundary residual " << rep.boundary_right_residual;
    throw Error(ErrorCode::inconsistent, msg.str());
  }
  return SplineSolution{std::move(s), std::move(jumps), rep, std::move(warnings)};
}

}  // namespace polysr
