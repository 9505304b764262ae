#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace l1sq {

enum class ErrorCode {
  kShapeMismatch,
  kDimensionMismatch,
  kNonFinite,
  kRankDeficient,
  kDomainError,
  kZeroVector,
  kMaxIterationsExceeded,
  kNumericalBreakdown,
  kInstanceTooLarge,
  kDegenerateDesign,
  kEmptyDatabase,
  kDuplicateLabel,
  kConfigInvalid,
  kTooFewSubspaces,
  kIoError,
  kFormatError,
  kChecksumMismatch,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace l1sq
