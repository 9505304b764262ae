#include "l1sq/error.hpp"

namespace l1sq {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kMaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kDegenerateDesign: return "DegenerateDesign";
    case ErrorCode::kEmptyDatabase: return "EmptyDatabase";
    case ErrorCode::kDuplicateLabel: return "DuplicateLabel";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kTooFewSubspaces: return "TooFewSubspaces";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

}  // namespace l1sq
