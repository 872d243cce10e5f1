#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polysr {

/// Failure categories raised by the library. The CLI maps these onto exit
/// codes (validation 2, solver 3, I/O 4).
enum class ErrorCode {
  domain,               ///< argument outside [-1,1] or similar
  index,                ///< basis index out of range
  shape,                ///< mismatched dimensions / degrees
  validation,           ///< malformed input object
  duplicate_location,   ///< two atoms closer than the duplicate tolerance
  separation,           ///< separation precondition violated
  reflection_collision, ///< reflected knot coincides with the original
  construction,         ///< certificate interpolation system is singular
  order_estimation,     ///< pencil model order exceeds the cap
  ill_posed,            ///< pencil eigenvalues far from the unit circle
  degenerate_locations, ///< rank-deficient collocation matrix
  inconsistent,         ///< forward-model residual too large after recovery
  infeasible,           ///< LP constraints cannot be met on the grid
  nonconvergence,       ///< iteration cap hit
  parse,                ///< malformed JSON
  io                    ///< file could not be read or written
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polysr
