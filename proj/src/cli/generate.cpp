#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "polysr/cli.hpp"
#include "polysr/spike_solver.hpp"
#include "polysr/spline_recovery.hpp"

namespace polysr::cli {

namespace {

constexpr double kPi = std::numbers::pi;

// Uniform [0,1) from the top 53 bits; identical on every standard library.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_fits(int M, int N, double factor) {
  if (M < 0) throw Error(ErrorCode::validation, "M must be nonnegative");
  if (N < 5) throw Error(ErrorCode::validation, "N must be at least 5");
  if (!(factor > 0.0)) throw Error(ErrorCode::validation, "separation factor must be positive");
  const double need = M * factor * kPi / N;
  const double room = kPi - 4.0 * kPi / N;
  if (need > room) {
    std::ostringstream msg;
    msg << "infeasible instance: M * factor * pi / N = " << need << " exceeds pi - 4 pi / N = "
        << room << " (M = " << M << ", factor = " << factor << ", N = " << N << ")";
    throw Error(ErrorCode::validation, msg.str());
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> draw_separated_angles(int M, int N, double factor, std::uint64_t seed) {
  check_fits(M, N, factor);
  const double lo = 2.0 * kPi / N, hi = kPi - lo, sep = factor * kPi / N;
  std::mt19937_64 rng(seed);
  // Sorted uniform draws on the shrunken interval, then spread by i * sep.
  const double span = hi - lo - (M > 0 ? (M - 1) * sep : 0.0);
  std::vector<double> t(M);
  for (auto& v : t) v = lo + span * uniform01(rng);
  std::sort(t.begin(), t.end());
  for (int i = 0; i < M; ++i) t[i] += i * sep;
  return t;
}

GeneratedInstance generate(const GenOptions& opts) {
  const BasisSpec basis{opts.basis, opts.N};
  std::mt19937_64 rng(splitmix64(opts.seed ^ 0x5851f42d4c957f2dULL));
  switch (opts.kind) {
    case ProblemKind::spikes: {
      const auto t = draw_separated_angles(opts.M, opts.N, opts.factor, opts.seed);
      std::vector<Atom> atoms;
      for (double tm : t) {
        cdouble w;
        if (opts.weights == "complex") {
          w = std::polar(1.0, 2.0 * kPi * uniform01(rng));
        } else if (opts.weights == "signed") {
          w = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        } else if (opts.weights == "positive") {
          w = 0.5 + uniform01(rng);
        } else {
          throw Error(ErrorCode::validation, "weights must be complex, signed or positive");
        }
        atoms.push_back({std::cos(tm), w});
      }
      DiracMeasure m(std::move(atoms));
      ProblemFile p = project(m, basis);
      return {std::move(p), std::move(m)};
    }
    case ProblemKind::spline: {
      if (opts.degree < 0) throw Error(ErrorCode::validation, "degree must be nonnegative");
      const auto t = draw_separated_angles(opts.M, opts.N, opts.factor, opts.seed);
      std::vector<Atom> jumps;
      for (double tm : t) {
        const double mag = 0.5 + uniform01(rng);
        jumps.push_back({std::cos(tm), uniform01(rng) < 0.5 ? -mag : mag});
      }
      std::vector<cdouble> left(opts.degree + 1);
      for (auto& v : left) v = 2.0 * uniform01(rng) - 1.0;
      Spline s = integrate_back(DiracMeasure(std::move(jumps)), left, opts.degree);
      ProblemFile p = project(s, basis);
      return {std::move(p), std::move(s)};
    }
    case ProblemKind::spikes2d: {
      check_fits(opts.M, opts.N, opts.factor);
      const double lo = 2.0 * kPi / opts.N, hi = kPi - lo, sep = opts.factor * kPi / opts.N;
      std::mt19937_64 prng(opts.seed);
      std::vector<Point2> ts;
      const long max_draws = 100000L * std::max(opts.M, 1);
      for (long draw = 0; static_cast<int>(ts.size()) < opts.M; ++draw) {
        if (draw >= max_draws) {
          std::ostringstream msg;
          msg << "could not place " << opts.M << " points at max-norm spacing " << sep
              << " rad in the window after " << max_draws << " draws";
          throw Error(ErrorCode::validation, msg.str());
        }
        const Point2 c{lo + (hi - lo) * uniform01(prng), lo + (hi - lo) * uniform01(prng)};
        bool ok = true;
        for (const auto& q : ts)
          if (std::max(std::abs(q[0] - c[0]), std::abs(q[1] - c[1])) < sep) ok = false;
        if (ok) ts.push_back(c);
      }
      std::vector<Atom2D> atoms;
      for (const auto& tp : ts) {
        const double mag = 0.5 + uniform01(rng);
        atoms.push_back({{std::cos(tp[0]), std::cos(tp[1])}, uniform01(rng) < 0.5 ? -mag : mag});
      }
      DiracMeasure2D m(std::move(atoms));
      ProblemFile p = project(m, basis);
      return {std::move(p), std::move(m)};
    }
  }
  throw Error(ErrorCode::validation, "unknown kind");
}

namespace {

struct TrialOutcome {
  bool pencil = false;
  bool lp = false;
  double ms = 0.0;
};

bool matches(const DiracMeasure& got, const DiracMeasure& truth) {
  if (got.size() != truth.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto& a = got.atoms()[i];
    const auto& b = truth.atoms()[i];
    if (cheb_distance(a.location, b.location) > 1e-6) return false;
    if (std::abs(a.weight - b.weight) > 1e-4 * std::abs(b.weight)) return false;
  }
  return true;
}

TrialOutcome run_trial(const PhaseOptions& o, double factor, std::uint64_t seed) {
  // Atoms sit on the LP grid (16 N + 1 points uniform in t), so both paths
  // can be exact.
  const int G = 16 * o.N + 1;
  const int gap = static_cast<int>(std::ceil(16.0 * factor - 1e-9));
  const int lo = 32, hi = G - 1 - 32;
  std::mt19937_64 rng(seed);
  std::vector<int> idx(o.M);
  const int span = hi - lo - (o.M - 1) * gap;
  for (auto& v : idx) v = lo + static_cast<int>(uniform01(rng) * (span + 1));
  std::sort(idx.begin(), idx.end());
  std::vector<Atom> atoms;
  for (int i = 0; i < o.M; ++i) {
    const double t = kPi * (idx[i] + i * gap) / (G - 1);
    const double mag = 0.5 + uniform01(rng);
    const double w = o.nonnegative ? mag : (uniform01(rng) < 0.5 ? -mag : mag);
    atoms.push_back({std::cos(t), w});
  }
  const DiracMeasure truth(std::move(atoms));
  const BasisSpec basis{BasisKind::chebyshev, o.N};
  const MomentVector y = moments_of_dirac(truth, basis);

  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    SolverOptions po;
    out.pencil = matches(recover_spikes(y, po).measure, truth);
  } catch (const Error&) {
  }
  try {
    SolverOptions lo_opts;
    lo_opts.method = SolverMethod::lp;
    lo_opts.lp_grid_size = G;
    lo_opts.lp_nonnegative = o.nonnegative;
    out.lp = matches(tv_lp_recover(y, lo_opts).measure, truth);
  } catch (const Error&) {
  }
  out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
               .count();
  return out;
}

}  // namespace

std::vector<PhaseRow> run_phase(const PhaseOptions& o) {
  if (o.steps < 2) throw Error(ErrorCode::validation, "steps must be at least 2");
  if (o.trials < 1) throw Error(ErrorCode::validation, "trials must be at least 1");
  if (o.parallelism < 1) throw Error(ErrorCode::validation, "parallelism must be at least 1");
  if (!(o.sep_min > 0.0) || !(o.sep_max >= o.sep_min))
    throw Error(ErrorCode::validation, "need 0 < sep_min <= sep_max");
  std::vector<double> factors(o.steps);
  for (int s = 0; s < o.steps; ++s)
    factors[s] = o.sep_min + (o.sep_max - o.sep_min) * s / (o.steps - 1);
  // On-grid spacing: 16 factor grid cells of pi / (16 N).
  for (double f : factors) {
    check_fits(o.M, o.N, f);
    const int gap = static_cast<int>(std::ceil(16.0 * f - 1e-9));
    if ((o.M - 1) * gap > 16 * o.N - 64) {
      std::ostringstream msg;
      msg << "infeasible sweep point: " << o.M << " atoms at factor " << f
          << " do not fit on the grid window";
      throw Error(ErrorCode::validation, msg.str());
    }
  }

  const std::size_t total = static_cast<std::size_t>(o.steps) * o.trials;
  std::vector<TrialOutcome> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const auto step = k / o.trials, trial = k % o.trials;
      const std::uint64_t seed =
          splitmix64(splitmix64(splitmix64(o.seed) + step) + trial);
      results[k] = run_trial(o, factors[step], seed);
    }
  };
  const int threads = std::min<int>(o.parallelism, static_cast<int>(total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::vector<PhaseRow> rows;
  for (int s = 0; s < o.steps; ++s) {
    PhaseRow r;
    r.factor = factors[s];
    r.sep_radians = factors[s] * kPi / o.N;
    int pencil = 0, lp = 0;
    double ms = 0.0;
    for (int t = 0; t < o.trials; ++t) {
      const auto& res = results[static_cast<std::size_t>(s) * o.trials + t];
      pencil += res.pencil;
      lp += res.lp;
      ms += res.ms;
    }
    r.pencil_success_rate = static_cast<double>(pencil) / o.trials;
    r.lp_success_rate = static_cast<double>(lp) / o.trials;
    r.mean_runtime_ms = o.timing ? ms / o.trials : 0.0;
    rows.push_back(r);
  }
  return rows;
}

std::string phase_csv(const std::vector<PhaseRow>& rows, bool timing) {
  std::string out = "factor,sep_radians,pencil_success_rate,lp_success_rate,mean_runtime_ms\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,", r.factor, r.sep_radians,
                  r.pencil_success_rate, r.lp_success_rate);
    out += buf;
    if (timing) {
      std::snprintf(buf, sizeof buf, "%.3f\n", r.mean_runtime_ms);
      out += buf;
    } else {
      out += "0\n";
    }
  }
  return out;
}

}  // namespace polysr::cli
