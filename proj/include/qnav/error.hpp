#pragma once

#include <stdexcept>
#include <string>

namespace qnav {

enum class ErrorCode {
  kInvalidDirection,
  kDimension,
  kCapacity,
  kInvalidPovm,
  kInvalidDistribution,
  kDegenerateBranch,
  kEmptyProtocol,
  kLengthMismatch,
  kInsufficientRecords,
  kInvalidAxes,
  kInsufficientBudget,
  kDegeneratePosterior,
  kSingularOperator,
  kUnknownEstimator,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this type; code() lets callers
// (and the CLI exit-code mapping) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qnav
