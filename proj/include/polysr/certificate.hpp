#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polysr/measure.hpp"

namespace polysr {

/// Trigonometric polynomial sum_{k=-d}^{d} a_k e^{ikt}.
struct TrigPoly {
  int degree = 0;
  Eigen::VectorXcd coeffs;  ///< a_{-d} .. a_d, index k + d

  TrigPoly() = default;
  TrigPoly(int d, Eigen::VectorXcd c);

  cdouble coeff(int k) const { return coeffs[k + degree]; }
  cdouble operator()(double t) const;
  cdouble derivative(double t) const;
};

/// Even trigonometric polynomial Q(t) = sum_k beta_k cos(kt).
struct EvenTrigPoly {
  int degree = 0;
  Eigen::VectorXcd cos_coeffs;

  cdouble operator()(double t) const;
};

/// Algebraic polynomial P(x) = sum_k beta_k T_k(x), evaluated by Clenshaw.
struct AlgebraicPoly {
  int degree = 0;
  Eigen::VectorXcd cheb_coeffs;

  cdouble operator()(double x) const;
};

/// Fourth power of the Fejer-type ratio sin(m t / 2) / (m sin(t / 2)) with
/// m = D/2 + 1, a real even trigonometric polynomial of degree D with
/// K(0) = 1. D is N rounded down to an even number.
class JacksonKernel {
 public:
  explicit JacksonKernel(int N);

  int degree() const noexcept { return degree_; }
  /// Fourier coefficient g_k for |k| <= degree.
  double coeff(int k) const { return k < 0 ? g_[-k] : g_[k]; }
  const Eigen::VectorXd& coeffs() const noexcept { return g_; }

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;

 private:
  int degree_;
  Eigen::VectorXd g_;  // g_0 .. g_D
};

struct ReflectedKnots {
  std::vector<double> t;
  std::vector<cdouble> u;
};

/// Mirror knots in [-pi, 0] about 0: t_m = t~_m for m <= M and
/// t_m = -t~_{2M-m+1} beyond, values mirrored the same way.
ReflectedKnots reflect_knots(std::span<const double> t_tilde, std::span<const cdouble> u_tilde);

struct TrigCertificate {
  TrigPoly poly;
  int kernel_degree = 0;
  double condition_estimate = 0.0;
  std::vector<std::string> warnings;
};

/// Q(t) = sum_m a_m K(t - t_m) + b_m K'(t - t_m) with Q(t_m) = u_m and
/// Q'(t_m) = 0; the interpolation system is solved by column-equilibrated LU.
TrigCertificate build_trig_certificate(std::span<const double> t, std::span<const cdouble> u,
                                       int N);

/// (Q(t) + Q(-t)) / 2 as a cosine series.
EvenTrigPoly symmetrize(const TrigPoly& q);

/// P(x) = Q(arccos x): the Chebyshev coefficients are the cosine coefficients.
AlgebraicPoly to_algebraic(const EvenTrigPoly& q);

struct CertificateBuild {
  AlgebraicPoly poly;
  int kernel_degree = 0;
  double condition_estimate = 0.0;
  SeparationReport separation;
  std::vector<std::string> warnings;
};

/// Dual polynomial of degree <= N with P(x_m) = u_m. Requires the minimal
/// separation condition unless `require_separation` is false.
CertificateBuild build_certificate(std::span<const double> knots, std::span<const cdouble> u,
                                   int N, bool require_separation = true);

struct VerifyOptions {
  int grid_points_per_degree = 16;
  double exclusion_radius = -1.0;  ///< rho units; negative selects (4pi/N)/100
  double interp_tol = 1e-9;
  double eval_tol = 1e-9;
};

struct CertificateReport {
  double interpolation_residual = 0.0;
  double off_support_max = 0.0;
  double off_support_argmax = 0.0;  ///< x where off_support_max is attained
  double near_knot_max = 0.0;
  bool near_knot_ok = true;
  int grid_size = 0;
  double exclusion_radius = 0.0;
  double interp_tol = 0.0;
  double eval_tol = 0.0;
  bool passed = false;
};

/// Dense scan of |P| on a grid uniform in t = arccos x, with golden-section
/// refinement of every local maximum.
CertificateReport verify_certificate(const AlgebraicPoly& p, std::span<const double> knots,
                                     std::span<const cdouble> u,
                                     const VerifyOptions& options = {});

/// Golden-section maximization of f on [a, b] to the given bracket width.
template <typename F>
double golden_section_max(F&& f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace polysr
