#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "polysr/error.hpp"
#include "polysr/measure.hpp"

namespace polysr::test {

inline constexpr double kPi = std::numbers::pi;

inline double uniform(std::mt19937_64& rng, double a = 0.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline cdouble unit_phase(std::mt19937_64& rng) { return std::polar(1.0, uniform(rng, 0.0, 2 * kPi)); }

// Angles in [2pi/N, pi - 2pi/N] spaced at least factor*pi/N apart (rejection).
inline std::vector<double> separated_angles(std::mt19937_64& rng, int M, int N, double factor) {
  const double lo = 2 * kPi / N, hi = kPi - lo, sep = factor * kPi / N;
  for (;;) {
    std::vector<double> t;
    for (int tries = 0; static_cast<int>(t.size()) < M && tries < 100000; ++tries) {
      const double c = uniform(rng, lo, hi);
      bool ok = true;
      for (double s : t) ok = ok && std::abs(s - c) >= sep;
      if (ok) t.push_back(c);
    }
    if (static_cast<int>(t.size()) == M) {
      std::sort(t.begin(), t.end());
      return t;
    }
  }
}

inline std::vector<double> to_x(const std::vector<double>& t) {
  std::vector<double> x;
  for (double v : t) x.push_back(std::cos(v));
  return x;
}

}  // namespace polysr::test

// Runs stmt and checks it throws polysr::Error with the given code.
#define EXPECT_POLYSR_ERROR(stmt, expected_code)                                   \
  do {                                                                             \
    try {                                                                          \
      stmt;                                                                        \
      ADD_FAILURE() << "no exception from " #stmt;                                 \
    } catch (const polysr::Error& e_) {                                            \
      EXPECT_EQ(polysr::to_string(e_.code()), polysr::to_string(expected_code))    \
          << e_.what();                                                            \
    }                                                                              \
  } while (0)

#include "polysr/spline_recovery.hpp"

namespace polysr::test {

// Degree-r spline with M knots at Definition-1 spacing (factor 4) and complex
// jumps in the r-th derivative.
inline Spline random_spline(std::mt19937_64& rng, int r, int M, int N) {
  const auto x = to_x(separated_angles(rng, M, N, 4.0));
  std::vector<Atom> jumps;
  for (double v : x) jumps.push_back({v, cdouble(uniform(rng, -1, 1), uniform(rng, -1, 1))});
  std::vector<cdouble> left(r + 1);
  for (auto& v : left) v = cdouble(uniform(rng, -1, 1), uniform(rng, -1, 1));
  return integrate_back(DiracMeasure(std::move(jumps)), left, r);
}

}  // namespace polysr::test
