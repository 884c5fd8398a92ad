#include "qflqg/error.hpp"

#include <sstream>

namespace qflqg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kNonpositiveHorizon: return "NonpositiveHorizon";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSingularInnerMatrix: return "SingularInnerMatrix";
    case ErrorCode::kSingularInnovationCovariance:
      return "SingularInnovationCovariance";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kTimeDesync: return "TimeDesync";
    case ErrorCode::kInvalidPartition: return "InvalidPartition";
    case ErrorCode::kNoCellFound: return "NoCellFound";
    case ErrorCode::kQuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::kUnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::kUnknownCell: return "UnknownCell";
    case ErrorCode::kDuplicateArrival: return "DuplicateArrival";
    case ErrorCode::kFutureOrigin: return "FutureOrigin";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kTrialFailed: return "TrialFailed";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

namespace {

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::ostringstream out;
  out << issues.size() << " validation issue(s)";
  for (const auto& issue : issues) {
    out << "; " << to_string(issue.code) << "(" << issue.field
        << "): " << issue.message;
  }
  return out.str();
}

ErrorCode first_code(const std::vector<ValidationIssue>& issues) {
  return issues.empty() ? ErrorCode::kParseError : issues.front().code;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(first_code(issues), summarize(issues)),
      issues_(std::move(issues)) {}

}  // namespace qflqg
