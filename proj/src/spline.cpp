#include "polysr/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polysr/error.hpp"

namespace polysr {

cdouble horner(std::span<const cdouble> coeffs, double x) noexcept {
  cdouble acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

cdouble horner_derivative(std::span<const cdouble> coeffs, int order, double x) noexcept {
  const int n = static_cast<int>(coeffs.size());
  cdouble acc = 0.0;
  for (int k = n - 1; k >= order; --k) {
    double falling = 1.0;
    for (int i = 0; i < order; ++i) falling *= k - i;
    acc = acc * x + coeffs[k] * falling;
  }
  return acc;
}

MonomialPoly differentiate(std::span<const cdouble> coeffs) {
  if (coeffs.size() <= 1) return MonomialPoly{};
  MonomialPoly out(coeffs.size() - 1);
  for (std::size_t k = 1; k < coeffs.size(); ++k)
    out[k - 1] = coeffs[k] * static_cast<double>(k);
  return out;
}

MonomialPoly antiderivative(std::span<const cdouble> coeffs) {
  MonomialPoly out(coeffs.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    out[k + 1] = coeffs[k] / static_cast<double>(k + 1);
  return out;
}

Spline::Spline(int degree, std::vector<double> knots, std::vector<MonomialPoly> pieces,
               double continuity_tol)
    : degree_(degree), knots_(std::move(knots)), pieces_(std::move(pieces)) {
  if (degree_ < 0) throw Error(ErrorCode::validation, "spline degree must be nonnegative");
  if (pieces_.size() != knots_.size() + 1) {
    std::ostringstream msg;
    msg << "spline has " << pieces_.size() << " pieces for " << knots_.size()
        << " knots";
    throw Error(ErrorCode::validation, msg.str());
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i] > -1.0 && knots_[i] < 1.0))
      throw Error(ErrorCode::validation, "spline knots must lie in (-1,1)");
    if (i > 0 && !(knots_[i] > knots_[i - 1]))
      throw Error(ErrorCode::validation, "spline knots must be strictly increasing");
  }
  double scale = 0.0;
  for (auto& p : pieces_) {
    if (p.size() > static_cast<std::size_t>(degree_) + 1)
      throw Error(ErrorCode::validation, "spline piece exceeds the spline degree");
    p.resize(degree_ + 1, 0.0);
    for (const auto& c : p) scale = std::max(scale, std::abs(c));
  }
  if (continuity_residual() > continuity_tol * std::max(scale, 1.0))
    throw Error(ErrorCode::validation, "spline pieces violate C^(r-1) continuity");

  left_.resize(degree_ + 1);
  right_.resize(degree_ + 1);
  for (int j = 0; j <= degree_; ++j) {
    left_[j] = horner_derivative(pieces_.front(), j, -1.0);
    right_[j] = horner_derivative(pieces_.back(), j, 1.0);
  }
}

std::size_t Spline::piece_index(double x) const {
  return static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) -
                                  knots_.begin());
}

cdouble Spline::operator()(double x) const { return horner(pieces_[piece_index(x)], x); }

cdouble Spline::derivative(double x, int order) const {
  return horner_derivative(pieces_[piece_index(x)], order, x);
}

double Spline::continuity_residual() const {
  double worst = 0.0;
  for (std::size_t m = 0; m < knots_.size(); ++m) {
    for (int j = 0; j < degree_; ++j) {
      const cdouble left = horner_derivative(pieces_[m], j, knots_[m]);
      const cdouble right = horner_derivative(pieces_[m + 1], j, knots_[m]);
      worst = std::max(worst, std::abs(left - right));
    }
  }
  return worst;
}

cdouble eval_spline(const Spline& s, double x) {
  if (!(std::abs(x) <= 1.0 + kDomainClamp)) {
    std::ostringstream msg;
    msg << "spline evaluated at " << x << " outside [-1,1]";
    throw Error(ErrorCode::domain, msg.str());
  }
  return s(std::clamp(x, -1.0, 1.0));
}

std::variant<Spline, DiracMeasure> spline_distributional_derivative(const Spline& s) {
  if (s.degree() == 0) {
    std::vector<Atom> jumps;
    jumps.reserve(s.knots().size());
    for (std::size_t m = 0; m < s.knots().size(); ++m)
      jumps.push_back({s.knots()[m], s.pieces()[m + 1][0] - s.pieces()[m][0]});
    return DiracMeasure(std::move(jumps));
  }
  std::vector<MonomialPoly> pieces;
  pieces.reserve(s.pieces().size());
  for (const auto& p : s.pieces()) pieces.push_back(differentiate(p));
  // The derivative is only C^(r-2); its continuity is inherited, so the
  // tolerance is loosened to the differentiated scale.
  return Spline(s.degree() - 1, s.knots(), std::move(pieces), 1e-6);
}

}  // namespace polysr
