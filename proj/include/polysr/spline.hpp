#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "polysr/measure.hpp"

namespace polysr {

/// Monomial coefficients c_0 + c_1 x + ... in the global variable x.
using MonomialPoly = std::vector<cdouble>;

cdouble horner(std::span<const cdouble> coeffs, double x) noexcept;
/// j-th derivative of a monomial polynomial evaluated at x.
cdouble horner_derivative(std::span<const cdouble> coeffs, int order, double x) noexcept;
MonomialPoly differentiate(std::span<const cdouble> coeffs);
/// Antiderivative with zero constant term.
MonomialPoly antiderivative(std::span<const cdouble> coeffs);

/// Degree-r spline on the partition {-1, x_1, ..., x_M, 1}.
///
/// Piece m lives on [x_m, x_{m+1}) (the last one is closed at 1) and is
/// stored as r+1 monomial coefficients in the global variable. Adjacent
/// pieces must agree in value and the first r-1 derivatives at every knot,
/// up to `continuity_tol` times the largest coefficient magnitude. Boundary
/// derivative values f^(j)(-1), f^(j)(1), j = 0..r, are derived from the
/// end pieces.
class Spline {
 public:
  static constexpr double kDefaultContinuityTol = 1e-9;

  Spline(int degree, std::vector<double> knots, std::vector<MonomialPoly> pieces,
         double continuity_tol = kDefaultContinuityTol);

  int degree() const noexcept { return degree_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<MonomialPoly>& pieces() const noexcept { return pieces_; }
  const std::vector<cdouble>& boundary_left() const noexcept { return left_; }
  const std::vector<cdouble>& boundary_right() const noexcept { return right_; }

  /// Index of the piece containing x (half-open, knots belong to the right).
  std::size_t piece_index(double x) const;

  cdouble operator()(double x) const;
  cdouble derivative(double x, int order) const;

  /// Largest mismatch of p^(j), j < degree, across the knots.
  double continuity_residual() const;

 private:
  int degree_;
  std::vector<double> knots_;
  std::vector<MonomialPoly> pieces_;
  std::vector<cdouble> left_;
  std::vector<cdouble> right_;
};

/// Evaluates s at x in [-1,1]; throws `domain` outside.
cdouble eval_spline(const Spline& s, double x);

/// Distributional derivative: a degree r-1 spline for r >= 1, otherwise the
/// Dirac train of jumps c_m - c_{m-1} at the knots.
std::variant<Spline, DiracMeasure> spline_distributional_derivative(const Spline& s);

}  // namespace polysr
