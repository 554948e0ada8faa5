#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noon {

enum class ErrorCode {
  dimension_mismatch,
  basis_mismatch,
  invalid_argument,
  singularity,
  undefined_angle,
  integration_failure,
  leakage_guard,
  degenerate_branch,
  degenerate_detuning,
  cutoff_too_small,
  validation,
  io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::basis_mismatch: return "basis_mismatch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::undefined_angle: return "undefined_angle";
    case ErrorCode::integration_failure: return "integration_failure";
    case ErrorCode::leakage_guard: return "leakage_guard";
    case ErrorCode::degenerate_branch: return "degenerate_branch";
    case ErrorCode::degenerate_detuning: return "degenerate_detuning";
    case ErrorCode::cutoff_too_small: return "cutoff_too_small";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

// Single exception type for the library; the code lets the CLI emit
// machine-readable failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace noon
