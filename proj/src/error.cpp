#include "odeflow/error.hpp"

namespace odeflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::kNonFiniteState:
      return "NonFiniteState";
    case ErrorCode::kNonFiniteValue:
      return "NonFiniteValue";
    case ErrorCode::kNonPositiveTime:
      return "NonPositiveTime";
    case ErrorCode::kEmptyDataset:
      return "EmptyDataset";
    case ErrorCode::kZeroVariance:
      return "ZeroVariance";
    case ErrorCode::kSingularFisher:
      return "SingularFisher";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace odeflow
