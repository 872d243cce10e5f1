#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace polysr {

using cdouble = std::complex<double>;

/// Inputs may overshoot [-1,1] by this much and are clamped silently.
inline constexpr double kDomainClamp = 1e-12;

/// Atoms closer than this are rejected as duplicates.
inline constexpr double kDuplicateTolerance = 1e-12;

/// Slack applied to separation comparisons so that sets built exactly on the
/// threshold (in floating point) are accepted.
inline constexpr double kSeparationSlack = 1e-12;

struct Atom {
  double location;
  cdouble weight;
};

/// Finite Dirac train sum_m c_m delta_{x_m} on [-1,1].
///
/// Atoms are kept sorted by location. Zero-weight atoms are dropped on
/// construction; near-coincident locations raise `duplicate_location`.
class DiracMeasure {
 public:
  DiracMeasure() = default;
  explicit DiracMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  std::vector<double> locations() const;
  std::vector<cdouble> weights() const;

  /// True when every weight has zero imaginary part.
  bool is_real() const noexcept;

 private:
  std::vector<Atom> atoms_;
};

/// Total variation norm of a Dirac train: sum of weight moduli.
double tv_norm(const DiracMeasure& m) noexcept;

/// Chebyshev metric rho(x, y) = |arccos x - arccos y|.
double cheb_distance(double x, double y);

/// arccos with the domain clamp applied; throws `domain` beyond it.
double checked_acos(double x);

struct SeparationReport {
  bool satisfied = true;
  double threshold = 0.0;  ///< radians
  double min_pair_distance = 0.0;  ///< +inf for fewer than two points
  std::vector<double> domain_violations;
  std::vector<std::pair<std::size_t, std::size_t>> pair_violations;
  bool below_guaranteed_regime = false;  ///< N below the guaranteed regime
  double threshold_factor = 4.0;  ///< threshold = factor * pi / N
};

/// Admissible window [cos(-pi + 2pi/N), cos(-2pi/N)] for support points.
std::pair<double, double> separation_window(int N);

/// Minimal separation check: every point in the window and every pair at
/// rho-distance >= 4 pi / N. Indices in `pair_violations` refer to the input
/// order. N < 128 is allowed and flagged.
SeparationReport check_separation(std::span<const double> locations, int N);

}  // namespace polysr
