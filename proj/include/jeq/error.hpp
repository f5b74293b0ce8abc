#pragma once

#include <stdexcept>
#include <string>

namespace jeq {

enum class errc {
  non_positive_metric,
  positivity_lost,
  non_admissible,
  infeasible_threshold,
  hypothesis_violation,
  insufficient_order,
  unknown_entry,
  grid_too_small,
  box_grid_unsupported,
  parse_error,
  config_error,
  io_error,
  linear_solve_failure,
  step_failure,
  continuity_exhausted,
  subsolution_violation,
  not_solved,
};

// Process exit code policy: configuration/input problems exit 3,
// numerical failures exit 2.
inline int exit_code(errc c) {
  switch (c) {
    case errc::parse_error:
    case errc::config_error:
    case errc::io_error:
    case errc::unknown_entry:
    case errc::box_grid_unsupported:
      return 3;
    default:
      return 2;
  }
}

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_positive_metric: return "NonPositiveMetric";
    case errc::positivity_lost: return "PositivityLost";
    case errc::non_admissible: return "NonAdmissible";
    case errc::infeasible_threshold: return "InfeasibleThreshold";
    case errc::hypothesis_violation: return "HypothesisViolation";
    case errc::insufficient_order: return "InsufficientOrder";
    case errc::unknown_entry: return "UnknownEntry";
    case errc::grid_too_small: return "GridTooSmall";
    case errc::box_grid_unsupported: return "BoxGridUnsupported";
    case errc::parse_error: return "ParseError";
    case errc::config_error: return "ConfigError";
    case errc::io_error: return "IoError";
    case errc::linear_solve_failure: return "LinearSolveFailure";
    case errc::step_failure: return "StepFailure";
    case errc::continuity_exhausted: return "ContinuityExhausted";
    case errc::subsolution_violation: return "SubsolutionViolation";
    case errc::not_solved: return "NotSolved";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace jeq
