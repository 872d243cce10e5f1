#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polysr/basis.hpp"
#include "polysr/lp.hpp"
#include "polysr/measure.hpp"
#include "polysr/spike_solver.hpp"

namespace polysr {

using Point2 = std::array<double, 2>;

/// Separation factor the 2D certificate construction relies on.
inline constexpr double kSafeSeparationFactor2D = 5.76;
/// Smaller factor quoted for the 2D separation condition; selectable only.
inline constexpr double kNominalSeparationFactor2D = 4.76;

struct Atom2D {
  Point2 location{};
  double weight = 0.0;
};

/// Real-weighted Dirac train on [-1,1]^2.
class DiracMeasure2D {
 public:
  DiracMeasure2D() = default;
  explicit DiracMeasure2D(std::vector<Atom2D> atoms);

  const std::vector<Atom2D>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  std::vector<Point2> locations() const;
  std::vector<double> weights() const;

 private:
  std::vector<Atom2D> atoms_;
};

double tv_norm(const DiracMeasure2D& m);

/// P(x) = sum b(k1,k2) T_k1(x(1)) T_k2(x(2)).
struct BivariatePoly {
  int N = 0;
  Eigen::MatrixXd cheb_coeffs;  ///< (N+1) x (N+1)

  double operator()(double x1, double x2) const;
};

struct SeparationReport2D {
  bool satisfied = true;
  double threshold = 0.0;        ///< radians
  double threshold_factor = kSafeSeparationFactor2D;
  double min_pair_distance = 0.0;  ///< max-norm rho; +inf below two points
  std::vector<std::size_t> domain_violations;  ///< input indices
  std::vector<std::pair<std::size_t, std::size_t>> pair_violations;
  bool below_guaranteed_regime = false;  ///< N < 512
  std::string note;  ///< set when the factor is below the safe 5.76
};

/// Componentwise-max rho separation against factor * pi / N, plus the
/// per-coordinate window t in [2pi/N, pi - 2pi/N].
SeparationReport2D check_separation_2d(std::span<const Point2> locations, int N,
                                       double threshold_factor = kSafeSeparationFactor2D);

/// Y(k1,k2) = sum c_m T_k1(x_m(1)) T_k2(x_m(2)).
Eigen::MatrixXd moments_2d(const DiracMeasure2D& m, int N);
/// Tensor moments in another basis, by per-axis conversion.
Eigen::MatrixXd moments_2d(const DiracMeasure2D& m, const BasisSpec& basis);

struct CertificateBuild2D {
  BivariatePoly poly;
  int kernel_degree = 0;
  double condition_estimate = 0.0;
  SeparationReport2D separation;
  std::vector<std::string> warnings;
};

/// Tensor-kernel interpolant with value u and zero gradient at the four
/// reflections of every point, folded to a cosine-cosine series.
CertificateBuild2D build_certificate_2d(std::span<const Point2> locations,
                                        std::span<const double> signs, int N,
                                        double threshold_factor = kSafeSeparationFactor2D,
                                        bool require_separation = true);

struct VerifyOptions2D {
  int grid_points_per_degree = 8;  ///< at least 4
  double exclusion_radius = -1.0;  ///< max-norm rho; negative selects (4pi/N)/100
  double interp_tol = 1e-9;
  double eval_tol = 1e-9;
  int max_refinements = 4096;
};

struct CertificateReport2D {
  double interpolation_residual = 0.0;
  double off_support_max = 0.0;
  Point2 off_support_argmax{};
  double near_knot_max = 0.0;
  bool near_knot_ok = true;
  int grid_size = 0;  ///< per axis
  int refined_maxima = 0;
  double exclusion_radius = 0.0;
  double interp_tol = 0.0;
  double eval_tol = 0.0;
  bool passed = false;
};

/// Tensor grid uniform in (t1, t2), then coordinate-wise golden-section
/// refinement of the local maxima of |P| that could exceed the grid maximum.
CertificateReport2D verify_certificate_2d(const BivariatePoly& p,
                                          std::span<const Point2> locations,
                                          std::span<const double> signs,
                                          const VerifyOptions2D& options = {});

/// A x = vec(T X T^T) for grid weights X(i, j) at (x_i, x_j), rows in
/// row-major (k1, k2) order and columns in row-major (i, j) order.
class KroneckerLpOperator final : public LpOperator {
 public:
  KroneckerLpOperator(int N, std::span<const double> grid);
  Eigen::Index rows() const override { return static_cast<Eigen::Index>(n1_) * n1_; }
  Eigen::Index cols() const override { return static_cast<Eigen::Index>(g_) * g_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const override;
  Eigen::MatrixXd normal(const Eigen::VectorXd& d) const override;
  Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const override;

 private:
  int n1_;  // N + 1
  int g_;
  Eigen::MatrixXd t_;   // (N+1) x G
  Eigen::MatrixXd t2_;  // (2N+1) x G, for product-to-sum
};

struct SpikeSolution2D {
  DiracMeasure2D measure;
  double residual = 0.0;  ///< relative Frobenius forward residual
  double lp_objective = 0.0;
  int lp_grid_size = 0;  ///< per axis
  int lp_iterations = 0;
  std::vector<std::string> warnings;
};

/// Grid TV minimization on the tensor grid (always the LP path; `method` is
/// ignored). Grid size per axis defaults to 2N+1.
SpikeSolution2D recover_spikes_2d(const Eigen::MatrixXd& y, const SolverOptions& opts = {});

}  // namespace polysr
