#pragma once

#include <span>
#include <string>
#include <vector>

#include "polysr/basis.hpp"
#include "polysr/measure.hpp"
#include "polysr/spike_solver.hpp"
#include "polysr/spline.hpp"

namespace polysr {

/// Projection of a degree-r spline onto V_N plus one-sided derivative values
/// f^(j)(-1), f^(j)(1) for j = 0..r.
struct SplineProblem {
  MomentVector y;
  int degree = 0;
  std::vector<cdouble> boundary_left;
  std::vector<cdouble> boundary_right;

  int N() const noexcept { return y.N(); }
  void validate() const;
};

/// Moments of f' from those of f: y'_k = f(1) P_k(1) - f(-1) P_k(-1) - (alpha y)_k.
MomentVector derivative_moments(const MomentVector& y, cdouble left_value, cdouble right_value);

/// Rebuilds the spline whose r-th derivative jumps by the given weights at
/// the atom locations, anchoring every antiderivative at -1.
Spline integrate_back(const DiracMeasure& jumps, std::span<const cdouble> boundary_left,
                      int degree);

struct ConsistencyReport {
  double moment_residual = 0.0;          ///< ||moments(s) - y|| / ||y||
  double boundary_left_residual = 0.0;   ///< max_j |s^(j)(-1) - f^(j)(-1)|
  double boundary_right_residual = 0.0;  ///< max_j |s^(j)(1) - f^(j)(1)|
  double continuity_residual = 0.0;
};

ConsistencyReport consistency_check(const Spline& s, const SplineProblem& p);

struct SplineSolution {
  Spline spline;
  DiracMeasure jumps;  ///< f^(r+1)
  ConsistencyReport report;
  std::vector<std::string> warnings;
};

/// Differentiates the data r+1 times, recovers the knots as spikes, refines
/// knots and jumps against the original moments, and integrates back.
/// Accepts when moments match to 1e-6 (relative) and the right boundary
/// values to 1e-8.
SplineSolution recover_spline(const SplineProblem& p, const SolverOptions& opts = {});

}  // namespace polysr
