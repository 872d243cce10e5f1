#include "polysr/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "polysr/error.hpp"

namespace polysr {

namespace {
constexpr double kPi = std::numbers::pi;
}

TrigPoly::TrigPoly(int d, Eigen::VectorXcd c) : degree(d), coeffs(std::move(c)) {
  if (coeffs.size() != 2 * degree + 1)
    throw Error(ErrorCode::shape, "trigonometric polynomial needs 2*degree+1 coefficients");
}

cdouble TrigPoly::operator()(double t) const {
  cdouble acc = coeffs[degree];
  for (int k = 1; k <= degree; ++k) {
    const cdouble e(std::cos(k * t), std::sin(k * t));
    acc += coeffs[degree + k] * e + coeffs[degree - k] * std::conj(e);
  }
  return acc;
}

cdouble TrigPoly::derivative(double t) const {
  cdouble acc = 0.0;
  const cdouble i(0.0, 1.0);
  for (int k = 1; k <= degree; ++k) {
    const cdouble e(std::cos(k * t), std::sin(k * t));
    acc += i * static_cast<double>(k) * (coeffs[degree + k] * e - coeffs[degree - k] * std::conj(e));
  }
  return acc;
}

cdouble EvenTrigPoly::operator()(double t) const {
  cdouble acc = 0.0;
  for (Eigen::Index k = 0; k < cos_coeffs.size(); ++k)
    acc += cos_coeffs[k] * std::cos(static_cast<double>(k) * t);
  return acc;
}

cdouble AlgebraicPoly::operator()(double x) const {
  const Eigen::Index n = cheb_coeffs.size();
  if (n == 0) return 0.0;
  cdouble b1 = 0.0, b2 = 0.0;
  for (Eigen::Index k = n - 1; k >= 1; --k) {
    const cdouble b0 = cheb_coeffs[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return cheb_coeffs[0] + x * b1 - b2;
}

JacksonKernel::JacksonKernel(int N) {
  if (N < 2) throw Error(ErrorCode::validation, "kernel degree must be at least 2");
  degree_ = N - N % 2;
  const int m = degree_ / 2 + 1;
  // (sin(mt/2) / (m sin(t/2)))^2 = sum_{|k|<m} (m - |k|) / m^2 e^{ikt}.
  std::vector<double> h(2 * m - 1);
  for (int k = -(m - 1); k <= m - 1; ++k)
    h[k + m - 1] = static_cast<double>(m - std::abs(k)) / (static_cast<double>(m) * m);
  g_ = Eigen::VectorXd::Zero(degree_ + 1);
  for (int k = 0; k <= degree_; ++k) {
    double acc = 0.0;
    for (int j = std::max(-(m - 1), k - (m - 1)); j <= std::min(m - 1, k + (m - 1)); ++j)
      acc += h[j + m - 1] * h[k - j + m - 1];
    g_[k] = acc;
  }
}

double JacksonKernel::value(double t) const {
  double acc = g_[0];
  for (int k = 1; k <= degree_; ++k) acc += 2.0 * g_[k] * std::cos(k * t);
  return acc;
}

double JacksonKernel::d1(double t) const {
  double acc = 0.0;
  for (int k = 1; k <= degree_; ++k) acc -= 2.0 * k * g_[k] * std::sin(k * t);
  return acc;
}

double JacksonKernel::d2(double t) const {
  double acc = 0.0;
  for (int k = 1; k <= degree_; ++k) acc -= 2.0 * static_cast<double>(k) * k * g_[k] * std::cos(k * t);
  return acc;
}

ReflectedKnots reflect_knots(std::span<const double> t_tilde, std::span<const cdouble> u_tilde) {
  if (t_tilde.size() != u_tilde.size())
    throw Error(ErrorCode::shape, "knot and value sequences differ in length");
  if (t_tilde.empty()) throw Error(ErrorCode::validation, "at least one knot is required");
  for (std::size_t i = 0; i < t_tilde.size(); ++i) {
    if (t_tilde[i] == 0.0 || t_tilde[i] == -kPi) {
      std::ostringstream msg;
      msg << "knot " << t_tilde[i] << " coincides with its reflection";
      throw Error(ErrorCode::reflection_collision, msg.str());
    }
    if (!(t_tilde[i] > -kPi && t_tilde[i] < 0.0))
      throw Error(ErrorCode::domain, "reflected knots must lie in (-pi, 0)");
    if (i > 0 && !(t_tilde[i] > t_tilde[i - 1]))
      throw Error(ErrorCode::validation, "knots must be strictly increasing");
  }
  const std::size_t m = t_tilde.size();
  ReflectedKnots out;
  out.t.resize(2 * m);
  out.u.resize(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    out.t[i] = t_tilde[i];
    out.u[i] = u_tilde[i];
    out.t[2 * m - 1 - i] = -t_tilde[i];
    out.u[2 * m - 1 - i] = u_tilde[i];
  }
  return out;
}

TrigCertificate build_trig_certificate(std::span<const double> t, std::span<const cdouble> u,
                                       int N) {
  if (t.size() != u.size()) throw Error(ErrorCode::shape, "knot and value sequences differ in length");
  if (t.empty()) throw Error(ErrorCode::validation, "at least one knot is required");
  const JacksonKernel kernel(N);
  const Eigen::Index p = static_cast<Eigen::Index>(t.size());

  // Unknowns [a; b]; rows [values; derivatives].
  Eigen::MatrixXd a(2 * p, 2 * p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index m = 0; m < p; ++m) {
      const double d = t[j] - t[m];
      const double k0 = kernel.value(d), k1 = kernel.d1(d), k2 = kernel.d2(d);
      a(j, m) = k0;
      a(j, p + m) = k1;
      a(p + j, m) = k1;
      a(p + j, p + m) = k2;
    }
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(2 * p);
  for (Eigen::Index j = 0; j < p; ++j) rhs[j] = u[j];

  Eigen::VectorXd scale(2 * p);
  for (Eigen::Index c = 0; c < 2 * p; ++c) {
    const double s = a.col(c).cwiseAbs().maxCoeff();
    scale[c] = s > 0.0 ? 1.0 / s : 1.0;
  }
  const Eigen::MatrixXd scaled = a * scale.asDiagonal();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(scaled);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "certificate interpolation system is singular (rcond " << rcond << ")";
    throw Error(ErrorCode::construction, msg.str());
  }
  const Eigen::VectorXd re = scale.asDiagonal() * lu.solve(rhs.real());
  const Eigen::VectorXd im = scale.asDiagonal() * lu.solve(rhs.imag());
  Eigen::VectorXcd sol(2 * p);
  sol.real() = re;
  sol.imag() = im;

  TrigCertificate out;
  out.kernel_degree = kernel.degree();
  out.condition_estimate = 1.0 / rcond;
  if (out.condition_estimate > 1e12) {
    std::ostringstream msg;
    msg << "interpolation system condition estimate " << out.condition_estimate << " exceeds 1e12";
    out.warnings.push_back(msg.str());
  }
  if (kernel.degree() != N) {
    std::ostringstream msg;
    msg << "kernel degree rounded down from " << N << " to " << kernel.degree();
    out.warnings.push_back(msg.str());
  }

  // K(t - t_m) = sum g_k e^{ik t} e^{-ik t_m};  K'(t - t_m) multiplies by ik.
  const int d = kernel.degree();
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(2 * N + 1);
  for (Eigen::Index m = 0; m < p; ++m) {
    const cdouble am = sol[m], bm = sol[p + m];
    for (int k = -d; k <= d; ++k) {
      const cdouble phase(std::cos(k * t[m]), -std::sin(k * t[m]));
      coeffs[k + N] += kernel.coeff(k) * phase * (am + cdouble(0.0, k) * bm);
    }
  }
  out.poly = TrigPoly(N, std::move(coeffs));
  return out;
}

EvenTrigPoly symmetrize(const TrigPoly& q) {
  EvenTrigPoly out;
  out.degree = q.degree;
  out.cos_coeffs.resize(q.degree + 1);
  out.cos_coeffs[0] = q.coeff(0);
  for (int k = 1; k <= q.degree; ++k) out.cos_coeffs[k] = q.coeff(k) + q.coeff(-k);
  return out;
}

AlgebraicPoly to_algebraic(const EvenTrigPoly& q) { return AlgebraicPoly{q.degree, q.cos_coeffs}; }

CertificateBuild build_certificate(std::span<const double> knots, std::span<const cdouble> u,
                                   int N, bool require_separation) {
  if (knots.size() != u.size())
    throw Error(ErrorCode::shape, "knot and value sequences differ in length");
  for (const auto& v : u) {
    if (std::abs(std::abs(v) - 1.0) > 1e-9)
      throw Error(ErrorCode::validation, "interpolation values must have unit modulus");
  }
  CertificateBuild out;
  out.separation = check_separation(knots, N);
  if (require_separation && !out.separation.satisfied)
    throw Error(ErrorCode::separation, "knots violate the minimal separation condition");
  if (out.separation.below_guaranteed_regime)
    out.warnings.push_back("N below 128: outside the guaranteed regime");

  // t~ = -arccos(x) lies in [-pi, 0] and increases with x.
  std::vector<std::size_t> order(knots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return knots[a] < knots[b]; });
  std::vector<double> t_tilde;
  std::vector<cdouble> u_tilde;
  for (auto i : order) {
    t_tilde.push_back(-checked_acos(knots[i]));
    u_tilde.push_back(u[i]);
  }
  const ReflectedKnots reflected = reflect_knots(t_tilde, u_tilde);
  TrigCertificate trig = build_trig_certificate(reflected.t, reflected.u, N);
  out.poly = to_algebraic(symmetrize(trig.poly));
  out.kernel_degree = trig.kernel_degree;
  out.condition_estimate = trig.condition_estimate;
  out.warnings.insert(out.warnings.end(), trig.warnings.begin(), trig.warnings.end());
  return out;
}

CertificateReport verify_certificate(const AlgebraicPoly& p, std::span<const double> knots,
                                     std::span<const cdouble> u, const VerifyOptions& options) {
  if (knots.size() != u.size())
    throw Error(ErrorCode::shape, "knot and value sequences differ in length");
  if (options.grid_points_per_degree < 8)
    throw Error(ErrorCode::validation, "grid_points_per_degree must be at least 8");
  const int n_deg = std::max(p.degree, 1);
  CertificateReport report;
  report.exclusion_radius =
      options.exclusion_radius >= 0.0 ? options.exclusion_radius : (4.0 * kPi / n_deg) / 100.0;
  report.interp_tol = options.interp_tol;
  report.eval_tol = options.eval_tol;

  for (std::size_t m = 0; m < knots.size(); ++m)
    report.interpolation_residual =
        std::max(report.interpolation_residual, std::abs(p(knots[m]) - u[m]));

  std::vector<double> knot_t(knots.size());
  for (std::size_t m = 0; m < knots.size(); ++m) knot_t[m] = checked_acos(knots[m]);
  auto distance = [&](double t) {
    double d = std::numeric_limits<double>::infinity();
    for (double kt : knot_t) d = std::min(d, std::abs(t - kt));
    return d;
  };
  auto magnitude = [&](double t) { return std::abs(p(std::cos(t))); };
  auto record = [&](double t, double v) {
    if (distance(t) < report.exclusion_radius) {
      report.near_knot_max = std::max(report.near_knot_max, v);
    } else if (v > report.off_support_max) {
      report.off_support_max = v;
      report.off_support_argmax = std::cos(t);
    }
  };

  const int g = options.grid_points_per_degree * n_deg;
  report.grid_size = g;
  const double h = kPi / (g - 1);
  std::vector<double> vals(g);
  for (int i = 0; i < g; ++i) {
    vals[i] = magnitude(i * h);
    record(i * h, vals[i]);
  }
  for (int i = 0; i < g; ++i) {
    const bool left_ok = i == 0 || vals[i] >= vals[i - 1];
    const bool right_ok = i == g - 1 || vals[i] >= vals[i + 1];
    if (!left_ok || !right_ok) continue;
    const double a = std::max(0.0, (i - 1) * h);
    const double b = std::min(kPi, (i + 1) * h);
    const double t = golden_section_max(magnitude, a, b, 1e-12);
    record(t, magnitude(t));
  }
  report.near_knot_ok = report.near_knot_max <= 1.0 + options.eval_tol;
  report.passed = report.interpolation_residual <= options.interp_tol &&
                  report.off_support_max < 1.0 && report.near_knot_ok;
  return report;
}

}  // namespace polysr
