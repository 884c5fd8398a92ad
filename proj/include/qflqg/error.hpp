#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qflqg {

enum class ErrorCode {
  kDimensionMismatch,
  kNotPsd,
  kNonpositiveHorizon,
  kParseError,
  kSingularInnerMatrix,
  kSingularInnovationCovariance,
  kIndexOutOfRange,
  kTimeDesync,
  kInvalidPartition,
  kNoCellFound,
  kQuadratureNotConverged,
  kUnsupportedDimension,
  kUnknownCell,
  kDuplicateArrival,
  kFutureOrigin,
  kInstanceTooLarge,
  kTrialFailed,
};

std::string_view to_string(ErrorCode code);

// Base exception for every failure raised by the library. The code is
// stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ValidationIssue {
  ErrorCode code;
  std::string field;
  std::string message;
};

// Raised by scenario/bank validation. Carries every violated invariant, not
// just the first one found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);

  const std::vector<ValidationIssue>& issues() const noexcept {
    return issues_;
  }

 private:
  std::vector<ValidationIssue> issues_;
};

}  // namespace qflqg
