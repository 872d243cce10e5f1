#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "polysr/basis.hpp"
#include "polysr/bivariate.hpp"
#include "polysr/error.hpp"
#include "polysr/measure.hpp"
#include "polysr/spline.hpp"

namespace polysr::cli {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitSolver = 3, kExitIo = 4 };

int exit_code_for(ErrorCode code) noexcept;

enum class ProblemKind { spikes, spline, spikes2d };

std::string_view to_string(ProblemKind k) noexcept;
ProblemKind parse_problem_kind(std::string_view name);

struct SplineRecord {
  int degree = 0;
  std::vector<cdouble> boundary_left;
  std::vector<cdouble> boundary_right;
};

/// Moments plus what is needed to interpret them. 2D moments are stored
/// row-major, (N+1)^2 entries.
struct ProblemFile {
  ProblemKind kind = ProblemKind::spikes;
  BasisSpec basis;
  std::vector<cdouble> moments;
  std::optional<SplineRecord> spline;

  void validate() const;
};

MomentVector moment_vector(const ProblemFile& p);
/// Real Chebyshev moment matrix of a 2D problem (other bases are converted).
Eigen::MatrixXd moment_matrix(const ProblemFile& p);

/// Ground truth: atoms, spline pieces, or 2D atoms.
using Truth = std::variant<DiracMeasure, Spline, DiracMeasure2D>;

/// Throws `parse` with line and column when text is not valid JSON.
void check_json_syntax(const std::string& text);

/// JSON text -> problem; malformed text raises `parse` with line and column.
ProblemFile parse_problem(const std::string& text);
std::string dump_problem(const ProblemFile& p);
Truth parse_truth(const std::string& text);
std::string dump_truth(const Truth& t);

/// Forward direction: moments (and boundary data) of a truth object.
ProblemFile project(const Truth& t, const BasisSpec& basis);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

struct GenOptions {
  ProblemKind kind = ProblemKind::spikes;
  int M = 10;
  int N = 128;
  int degree = 0;
  double factor = 4.0;  ///< minimum separation in units of pi / N
  BasisKind basis = BasisKind::chebyshev;
  std::uint64_t seed = 1;
  /// complex (unit modulus), signed (+-1), or positive; spikes only.
  std::string weights = "complex";
};

struct GeneratedInstance {
  ProblemFile problem;
  Truth truth;
};

/// Deterministic given the options. Throws `validation` naming the violated
/// inequality when M atoms cannot fit.
GeneratedInstance generate(const GenOptions& opts);

/// Knot angles in [2pi/N, pi - 2pi/N], spaced by at least factor pi / N,
/// sorted increasing.
std::vector<double> draw_separated_angles(int M, int N, double factor, std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct PhaseOptions {
  int trials = 50;
  double sep_min = 1.0;
  double sep_max = 5.0;
  int steps = 5;
  int N = 128;
  int M = 10;
  std::uint64_t seed = 1;
  int parallelism = 1;
  bool nonnegative = false;
  bool timing = true;
};

struct PhaseRow {
  double factor = 0.0;
  double sep_radians = 0.0;
  double pencil_success_rate = 0.0;
  double lp_success_rate = 0.0;
  double mean_runtime_ms = 0.0;
};

std::vector<PhaseRow> run_phase(const PhaseOptions& opts);
/// Header factor,sep_radians,pencil_success_rate,lp_success_rate,mean_runtime_ms.
std::string phase_csv(const std::vector<PhaseRow>& rows, bool timing = true);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polysr::cli
