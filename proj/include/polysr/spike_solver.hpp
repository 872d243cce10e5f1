#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polysr/basis.hpp"
#include "polysr/lp.hpp"
#include "polysr/measure.hpp"

namespace polysr {

enum class SolverMethod { pencil, lp };

std::string_view to_string(SolverMethod m) noexcept;
SolverMethod parse_solver_method(std::string_view name);

struct SolverOptions {
  SolverMethod method = SolverMethod::pencil;
  double pencil_rank_tol = 1e-8;  ///< relative singular-value cutoff
  int lp_grid_size = 0;           ///< 0 selects 16 N + 1
  bool lp_nonnegative = false;
  double coefficient_tol = 1e-8;  ///< relative to max |y_k|
  int max_model_order = 0;        ///< 0 selects floor((N - 1) / 2)
  double residual_tol = 1e-6;     ///< forward residual relative to ||y||
  /// Apply (1 - z^-2)^D to the extended cosine sequence before the pencil.
  /// Suppresses content at t = 0 and t = pi; used by the spline path.
  int endpoint_annihilation = 0;
  double lp_active_tol = 1e-6;  ///< grid mass counted active, relative to the largest
  LpOptions lp;

  void validate() const;
};

/// Chebyshev moments relabelled as cosine moments s_k = sum c_m cos(k t_m).
struct RecastMoments {
  int N = 0;
  Eigen::VectorXcd s;
  std::vector<std::string> warnings;
};

RecastMoments recast_moments(const MomentVector& y);

struct PencilResult {
  std::vector<double> t;  ///< sorted nodes in [0, pi]
  int rank = 0;           ///< numerical rank of the Hankel matrix
  std::vector<double> singular_values;
};

/// Matrix pencil on the symmetric extension u_k = s_|k|, k = -N..N.
PencilResult matrix_pencil(const RecastMoments& s, const SolverOptions& opts = {});

struct CoefficientFit {
  std::vector<cdouble> weights;
  double residual = 0.0;  ///< ||A c - y|| / ||y|| (absolute when y = 0)
};

/// Least squares for the weights of atoms at known locations.
CoefficientFit solve_coefficients(std::span<const double> locations, const MomentVector& y);

struct SpikeSolution {
  DiracMeasure measure;
  double residual = 0.0;  ///< relative forward residual, Chebyshev moments
  std::vector<std::string> warnings;
  int model_order = 0;            ///< pencil rank (pencil path)
  double lp_objective = 0.0;      ///< TV of the grid solution (LP path)
  int lp_grid_size = 0;
  int lp_iterations = 0;
};

SpikeSolution recover_spikes(const MomentVector& y, const SolverOptions& opts = {});

/// Grid TV minimization; real moments only.
SpikeSolution tv_lp_recover(const MomentVector& y, const SolverOptions& opts = {});

/// Grid uniform in t: x_j = cos(pi j / (G - 1)), j = 0..G-1 (decreasing x).
std::vector<double> lp_grid(int grid_size);

}  // namespace polysr
