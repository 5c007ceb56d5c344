#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace odeflow {

enum class ErrorCode {
  kDimensionMismatch,
  kNonFiniteState,
  kNonFiniteValue,
  kNonPositiveTime,
  kEmptyDataset,
  kZeroVariance,
  kSingularFisher,
  kInvalidArgument,
};

[[nodiscard]] std::string_view to_string(ErrorCode code);

/// Exception type thrown by every odeflow routine. The code identifies the
/// failure class; what() carries a human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace odeflow
