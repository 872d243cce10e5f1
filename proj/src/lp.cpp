#include "polysr/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace polysr {

Eigen::MatrixXd DenseLpOperator::normal(const Eigen::VectorXd& d) const {
  const Eigen::MatrixXd scaled = a_ * d.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a_.rows(), a_.rows());
  m.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  return m.selfadjointView<Eigen::Lower>();
}

Eigen::VectorXd SplitLpOperator::apply(const Eigen::VectorXd& x) const {
  const Eigen::Index n = base_.cols();
  return base_.apply(x.head(n) - x.tail(n));
}

Eigen::VectorXd SplitLpOperator::apply_transpose(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd half = base_.apply_transpose(y);
  Eigen::VectorXd out(2 * half.size());
  out << half, -half;
  return out;
}

Eigen::MatrixXd SplitLpOperator::normal(const Eigen::VectorXd& d) const {
  const Eigen::Index n = base_.cols();
  return base_.normal(d.head(n) + d.tail(n));
}

Eigen::MatrixXd SplitLpOperator::columns(const std::vector<Eigen::Index>& idx) const {
  const Eigen::Index n = base_.cols();
  std::vector<Eigen::Index> folded(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) folded[i] = idx[i] % n;
  Eigen::MatrixXd out = base_.columns(folded);
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i] >= n) out.col(static_cast<Eigen::Index>(i)) *= -1.0;
  return out;
}

namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

// Cholesky of the equilibrated normal matrix, with a growing diagonal shift
// when the factorization breaks down near the optimum.
class NormalSolver {
 public:
  explicit NormalSolver(const Eigen::MatrixXd& m) {
    scale_ = m.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = scale_.asDiagonal() * m * scale_.asDiagonal();
    double shift = 1e-14;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd shifted = scaled;
      shifted.diagonal().array() += shift;
      llt_.compute(shifted);
      if (llt_.info() == Eigen::Success) return;
      shift *= 100.0;
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    return scale_.cwiseProduct(llt_.solve(scale_.cwiseProduct(r)));
  }

 private:
  Eigen::VectorXd scale_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct Candidate {
  Eigen::VectorXd x, lambda;
  double primal_residual = 0.0;
};

// Lawson-Hanson active-set solution of min ||A z - b||, z >= 0.
// NNLS refactors its passive set every step, so its cost grows like
// rows * passive^3; large constraint sets get tighter limits.
Eigen::Index max_candidates(Eigen::Index rows) { return rows <= 512 ? 4096 : 512; }
Eigen::Index max_passive(Eigen::Index rows) { return rows <= 512 ? rows : 256; }

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double a_max = std::max(1e-300, a.cwiseAbs().maxCoeff());
  auto solve_passive = [&](Eigen::VectorXd& out) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    out = Eigen::VectorXd::Zero(n);
    if (idx.empty()) return;
    const Eigen::VectorXd sp = a(Eigen::all, idx).colPivHouseholderQr().solve(b);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = sp[i];
  };
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd r = b - a * z;
    const double r_norm = r.norm();
    if (r_norm <= 1e-15 * b.norm()) break;
    // The gradient is compared with the residual itself: near-collinear
    // columns make it tiny long before the fit is exact.
    const Eigen::VectorXd w = a.transpose() * r;
    Eigen::Index best = -1;
    double wmax = 1e-13 * a_max * r_norm;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    if (std::count(passive.begin(), passive.end(), true) >= max_passive(a.rows())) break;
    passive[best] = true;
    Eigen::VectorXd trial;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      solve_passive(trial);
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && trial[j] <= 0.0) {
          feasible = false;
          alpha = std::min(alpha, z[j] / (z[j] - trial[j]));
        }
      }
      if (feasible) break;
      z += alpha * (trial - z);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 1e-15 * std::max(1.0, z.cwiseAbs().maxCoeff())) {
          passive[j] = false;
          z[j] = 0.0;
        }
    }
    z = trial;
  }
  return z;
}

// Treat {j : x_j > threshold} as candidate columns, find a nonnegative exact
// fit on them (NNLS), then move lambda minimally so that the reduced costs on
// the fitted support vanish. Accepts only if primal, dual and gap tests pass.
bool try_crossover(const LpOperator& a, const Eigen::VectorXd& cost, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& lambda, double threshold,
                   const Eigen::VectorXd* constant_dual, const LpOptions& options,
                   Candidate& out) {
  std::vector<Eigen::Index> candidates;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x[j] > threshold) candidates.push_back(j);
  const Eigen::Index m = a.rows();
  // A basis has at most m columns; a much larger candidate set means the
  // iterates have not settled and NNLS on it would be expensive.
  if (static_cast<Eigen::Index>(candidates.size()) > max_candidates(m)) return false;
  std::vector<Eigen::Index> support;
  Eigen::VectorXd xs(0);
  Eigen::MatrixXd as(m, 0);
  if (!candidates.empty()) {
    const Eigen::MatrixXd ac = a.columns(candidates);
    const Eigen::VectorXd zc = nnls(ac, b);
    std::vector<Eigen::Index> local;
    for (Eigen::Index i = 0; i < zc.size(); ++i)
      if (zc[i] > 0.0) local.push_back(i);
    if (static_cast<Eigen::Index>(local.size()) > m) return false;
    as = ac(Eigen::all, local);
    xs = zc(local);
    for (auto i : local) support.push_back(candidates[i]);
  }
  const Eigen::VectorXd rp = b - as * xs;
  const double presid = rp.norm() / (1.0 + b.norm());
  // A basic solution fits to rounding level; anything looser is a near miss
  // from a nearby support, not the optimum.
  if (presid > std::min(options.feas_tol, 1e-12)) return false;

  Eigen::VectorXd full = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < support.size(); ++i) full[support[i]] = xs[i];
  const double pobj = cost.dot(full);
  const double c_scale = 1.0 + cost.cwiseAbs().maxCoeff();
  auto certifies = [&](const Eigen::VectorXd& lam) {
    const Eigen::VectorXd s = cost - a.apply_transpose(lam);
    if (s.minCoeff() < -options.feas_tol * c_scale) return false;
    return std::abs(pobj - b.dot(lam)) / (1.0 + std::abs(pobj)) <= options.gap_tol;
  };

  Eigen::VectorXd lam = lambda;
  if (!support.empty()) {
    Eigen::VectorXd cs(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) cs[i] = cost[support[i]];
    const Eigen::VectorXd defect = cs - as.transpose() * lam;
    lam += as * (as.transpose() * as).ldlt().solve(defect);
  }
  if (!certifies(lam)) {
    if (constant_dual == nullptr || !certifies(*constant_dual)) return false;
    lam = *constant_dual;
  }
  out.x = std::move(full);
  out.lambda = std::move(lam);
  out.primal_residual = presid;
  return true;
}

}  // namespace

LpResult solve_lp(const LpOperator& a, const Eigen::VectorXd& cost, const Eigen::VectorXd& b,
                  const LpOptions& options) {
  const Eigen::Index n = a.cols();
  LpResult result;
  const double b_norm = b.norm();
  const double c_norm = cost.norm();

  // Mehrotra's starting point, kept away from the boundary of the orthant.
  Eigen::VectorXd x, s, lambda;
  std::optional<Eigen::VectorXd> constant_dual;
  {
    const NormalSolver m0(a.normal(Eigen::VectorXd::Ones(n)));
    x = a.apply_transpose(m0.solve(b));
    lambda = m0.solve(a.apply(cost));
    // When c lies in the row space of A every feasible point is optimal and
    // this lambda (with zero reduced costs) certifies it.
    if ((cost - a.apply_transpose(lambda)).norm() <= 1e-12 * (1.0 + c_norm))
      constant_dual = lambda;
    s = cost - a.apply_transpose(lambda);
    x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
    s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
    const double xs = x.dot(s);
    if (xs > 1e-300) {
      const double dx = 0.5 * xs / s.sum();
      const double ds = 0.5 * xs / x.sum();
      x.array() += dx;
      s.array() += ds;
    }
    x = x.cwiseMax(1e-2 * std::max(1.0, b.cwiseAbs().maxCoeff()));
    s = s.cwiseMax(1e-2 * std::max(1.0, cost.cwiseAbs().maxCoeff()));
  }

  int stalled = 0;
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd rp = b - a.apply(x);
    const Eigen::VectorXd rd = cost - a.apply_transpose(lambda) - s;
    const double pobj = cost.dot(x);
    const double dobj = b.dot(lambda);
    const double mu = x.dot(s) / static_cast<double>(n);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    result.iterations = iter;
    result.primal_residual = rp.norm() / (1.0 + b_norm);
    const bool primal_ok = result.primal_residual <= options.feas_tol;
    const bool dual_ok = rd.norm() / (1.0 + c_norm) <= options.feas_tol;
    if (primal_ok && dual_ok && gap <= options.gap_tol) {
      result.status = LpStatus::optimal;
      break;
    }
    if (gap < 1e-3 && result.primal_residual < 1e-3) {
      const double xmax = x.maxCoeff();
      Candidate cand;
      bool done = false;
      for (double rel : {1e-3, 1e-5, 1e-7}) {
        if (try_crossover(a, cost, b, x, lambda, rel * xmax, constant_dual ? &*constant_dual : nullptr,
                          options, cand)) {
          done = true;
          break;
        }
      }
      if (done) {
        x = std::move(cand.x);
        lambda = std::move(cand.lambda);
        s = cost - a.apply_transpose(lambda);
        result.primal_residual = cand.primal_residual;
        result.status = LpStatus::optimal;
        result.crossover = true;
        break;
      }
    }
    if (iter == options.max_iterations || stalled >= 5) break;

    const Eigen::VectorXd d = x.cwiseQuotient(s);
    const NormalSolver solver(a.normal(d));
    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dl,
                         Eigen::VectorXd& ds) {
      const Eigen::VectorXd tmp = d.cwiseProduct(rd) - rc.cwiseQuotient(s);
      dl = solver.solve(rp + a.apply(tmp));
      ds = rd - a.apply_transpose(dl);
      dx = (rc - x.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dx_aff, dl_aff, ds_aff;
    direction(-x.cwiseProduct(s), dx_aff, dl_aff, ds_aff);
    const double ap_aff = max_step(x, dx_aff);
    const double ad_aff = max_step(s, ds_aff);
    const double mu_aff =
        (x + ap_aff * dx_aff).dot(s + ad_aff * ds_aff) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    Eigen::VectorXd rc = -x.cwiseProduct(s) - dx_aff.cwiseProduct(ds_aff);
    rc.array() += sigma * mu;
    Eigen::VectorXd dx, dl, ds;
    direction(rc, dx, dl, ds);
    const double eta = std::max(0.9, 1.0 - 10.0 * mu);
    const double ap = std::min(1.0, eta * max_step(x, dx));
    const double ad = std::min(1.0, eta * max_step(s, ds));
    stalled = (ap < 1e-8 && ad < 1e-8) ? stalled + 1 : 0;
    const Eigen::VectorXd x_new = x + ap * dx;
    const Eigen::VectorXd l_new = lambda + ad * dl;
    const Eigen::VectorXd s_new = s + ad * ds;
    if (!x_new.allFinite() || !s_new.allFinite() || !l_new.allFinite()) break;
    x = x_new;
    lambda = l_new;
    s = s_new;
  }

  if (result.status != LpStatus::optimal && n <= max_candidates(a.rows())) {
    // Last resort: the nonnegative fit over every column.
    Candidate cand;
    if (try_crossover(a, cost, b, Eigen::VectorXd::Ones(n), lambda, 0.0,
                      constant_dual ? &*constant_dual : nullptr, options, cand)) {
      x = std::move(cand.x);
      lambda = std::move(cand.lambda);
      result.status = LpStatus::optimal;
      result.crossover = true;
    }
  }

  result.x = x;
  result.dual = lambda;
  result.primal_objective = cost.dot(x);
  result.dual_objective = b.dot(lambda);
  result.primal_residual = (b - a.apply(x)).norm() / (1.0 + b_norm);
  if (result.status != LpStatus::optimal && result.primal_residual > options.infeasible_tol)
    result.status = LpStatus::infeasible;
  return result;
}

}  // namespace polysr
