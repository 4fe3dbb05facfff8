#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace freewalk {

/// Failure categories. The numeric value doubles as the CLI exit code.
enum class ErrorCode : int {
  InvalidArgument = 3,
  InvalidGroup = 4,
  InvalidMeasure = 5,
  NonGenerating = 6,
  RecurrentGroup = 7,
  MaxIterExceeded = 8,
  ConsistencyViolation = 9,
  BudgetExceeded = 10,
  SpecParse = 11,
  DomainError = 12,
  Degenerate = 13,
};

constexpr std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGroup: return "InvalidGroup";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::NonGenerating: return "NonGenerating";
    case ErrorCode::RecurrentGroup: return "RecurrentGroup";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::ConsistencyViolation: return "ConsistencyViolation";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::SpecParse: return "SpecParse";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::size_t factor)
      : Error(code, message) {
    factor_ = factor;
  }

  ErrorCode code() const noexcept { return code_; }

  /// Offending factor index, set for NonGenerating.
  std::optional<std::size_t> factor() const noexcept { return factor_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> factor_;
};

}  // namespace freewalk
