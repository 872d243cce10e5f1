#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "polysr/measure.hpp"
#include "polysr/spline.hpp"

namespace polysr {

enum class BasisKind { monomial, chebyshev, legendre };

std::string_view to_string(BasisKind kind) noexcept;
/// Parses "monomial" / "chebyshev" / "legendre"; throws `validation`.
BasisKind parse_basis_kind(std::string_view name);

/// A basis {P_k}, k = 0..N, of the polynomials of degree <= N. All three
/// families have P_0 = 1.
struct BasisSpec {
  BasisKind kind = BasisKind::chebyshev;
  int N = 0;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Data y_k = <f, P_k>, k = 0..N.
struct MomentVector {
  BasisSpec basis;
  Eigen::VectorXcd values;

  MomentVector() = default;
  MomentVector(BasisSpec b, Eigen::VectorXcd v);

  int N() const noexcept { return basis.N; }
};

/// Row k holds the expansion P'_k = sum_n alpha[k][n] P_n.
struct DerivativeMatrix {
  BasisSpec basis;
  Eigen::MatrixXd entries;
};

/// P_k(x) by three-term recurrence (Chebyshev, Legendre) or direct power.
double eval_basis(const BasisSpec& basis, int k, double x);

/// P_0(x) .. P_N(x) in one recurrence sweep.
Eigen::VectorXd eval_basis_all(const BasisSpec& basis, double x);

/// (N+1) x n matrix A[k][j] = P_k(x_j).
Eigen::MatrixXd collocation_matrix(const BasisSpec& basis, std::span<const double> xs);

/// Exact derivative coefficients; cached per basis, safe for concurrent use.
const DerivativeMatrix& derivative_matrix(const BasisSpec& basis);

/// Matrix C with target_j = sum_k C[j][k] source_k, built by running the
/// target recurrence on coefficient vectors in the source basis. Cached.
const Eigen::MatrixXd& conversion_matrix(const BasisSpec& source, const BasisSpec& target);

/// Moments of the same measure against another basis of equal degree.
MomentVector change_of_basis(const MomentVector& y, const BasisSpec& target);

/// y_k = sum_m c_m P_k(x_m).
MomentVector moments_of_dirac(const DiracMeasure& m, const BasisSpec& basis);

/// y_k = integral of s(x) P_k(x) over [-1,1], by per-piece Gauss-Legendre
/// quadrature exact for degree N + r integrands.
MomentVector moments_of_spline(const Spline& s, const BasisSpec& basis);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1] (Newton on P_n).
QuadratureRule gauss_legendre(int n);

}  // namespace polysr
