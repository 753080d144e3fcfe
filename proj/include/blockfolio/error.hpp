#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockfolio {

// Stable error identifiers. The CLI prints these verbatim in its "code" field.
enum class ErrorCode {
  too_few_rows,
  constant_column,
  eigen_failure,
  degenerate_fit,
  no_feasible_threshold,
  invalid_spec,
  not_transitive,
  solver_failure,
  infeasible,
  zero_market_variance,
  degenerate_beta,
  negative_beta,
  parse_error,
  non_monotone_dates,
  all_missing,
  insufficient_history,
  no_valid_windows,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::too_few_rows: return "TooFewRows";
    case ErrorCode::constant_column: return "ConstantColumn";
    case ErrorCode::eigen_failure: return "EigenFailure";
    case ErrorCode::degenerate_fit: return "DegenerateFit";
    case ErrorCode::no_feasible_threshold: return "NoFeasibleThreshold";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::not_transitive: return "NotTransitive";
    case ErrorCode::solver_failure: return "SolverFailure";
    case ErrorCode::infeasible: return "Infeasible";
    case ErrorCode::zero_market_variance: return "ZeroMarketVariance";
    case ErrorCode::degenerate_beta: return "DegenerateBeta";
    case ErrorCode::negative_beta: return "NegativeBeta";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::non_monotone_dates: return "NonMonotoneDates";
    case ErrorCode::all_missing: return "AllMissing";
    case ErrorCode::insufficient_history: return "InsufficientHistory";
    case ErrorCode::no_valid_windows: return "NoValidWindows";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace blockfolio
