#include "polysr/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "polysr/error.hpp"

namespace polysr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::index: return "index";
    case ErrorCode::shape: return "shape";
    case ErrorCode::validation: return "validation";
    case ErrorCode::duplicate_location: return "duplicate_location";
    case ErrorCode::separation: return "separation";
    case ErrorCode::reflection_collision: return "reflection_collision";
    case ErrorCode::construction: return "construction";
    case ErrorCode::order_estimation: return "order_estimation";
    case ErrorCode::ill_posed: return "ill_posed";
    case ErrorCode::degenerate_locations: return "degenerate_locations";
    case ErrorCode::inconsistent: return "inconsistent";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::nonconvergence: return "nonconvergence";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

DiracMeasure::DiracMeasure(std::vector<Atom> atoms) {
  atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                             [](const Atom& a) { return a.weight == 0.0; }),
              atoms.end());
  for (auto& a : atoms) {
    if (!std::isfinite(a.location) || std::abs(a.location) > 1.0 + kDomainClamp) {
      std::ostringstream msg;
      msg << "atom location " << a.location << " outside [-1,1]";
      throw Error(ErrorCode::domain, msg.str());
    }
    a.location = std::clamp(a.location, -1.0, 1.0);
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (atoms[i].location - atoms[i - 1].location <= kDuplicateTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "duplicate atom locations " << atoms[i - 1].location << " and "
          << atoms[i].location;
      throw Error(ErrorCode::duplicate_location, msg.str());
    }
  }
  atoms_ = std::move(atoms);
}

std::vector<double> DiracMeasure::locations() const {
  std::vector<double> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.location);
  return out;
}

std::vector<cdouble> DiracMeasure::weights() const {
  std::vector<cdouble> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.weight);
  return out;
}

bool DiracMeasure::is_real() const noexcept {
  return std::all_of(atoms_.begin(), atoms_.end(),
                     [](const Atom& a) { return a.weight.imag() == 0.0; });
}

double tv_norm(const DiracMeasure& m) noexcept {
  double total = 0.0;
  for (const auto& a : m.atoms()) total += std::abs(a.weight);
  return total;
}

double checked_acos(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainClamp)) {
    std::ostringstream msg;
    msg << "argument " << x << " outside [-1,1]";
    throw Error(ErrorCode::domain, msg.str());
  }
  return std::acos(std::clamp(x, -1.0, 1.0));
}

double cheb_distance(double x, double y) {
  return std::abs(checked_acos(x) - checked_acos(y));
}

std::pair<double, double> separation_window(int N) {
  const double c = std::cos(2.0 * std::numbers::pi / N);
  return {-c, c};
}

SeparationReport check_separation(std::span<const double> locations, int N) {
  if (N <= 0) throw Error(ErrorCode::validation, "N must be positive");
  SeparationReport report;
  report.threshold = 4.0 * std::numbers::pi / N;
  report.threshold_factor = 4.0;
  report.below_guaranteed_regime = N < 128;
  report.min_pair_distance = std::numeric_limits<double>::infinity();

  // Window test in t = arccos x: t in [2pi/N, pi - 2pi/N].
  const double t_lo = 2.0 * std::numbers::pi / N;
  const double t_hi = std::numbers::pi - t_lo;
  std::vector<double> t(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    t[i] = checked_acos(locations[i]);
    if (t[i] < t_lo - kSeparationSlack || t[i] > t_hi + kSeparationSlack)
      report.domain_violations.push_back(locations[i]);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const double d = std::abs(t[i] - t[j]);
      report.min_pair_distance = std::min(report.min_pair_distance, d);
      if (d < report.threshold - kSeparationSlack)
        report.pair_violations.emplace_back(i, j);
    }
  }
  report.satisfied =
      report.domain_violations.empty() && report.pair_violations.empty();
  return report;
}

}  // namespace polysr
