#include "stroke_painter/error.hpp"

namespace stroke_painter {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonConvexCoefficients: return "NonConvexCoefficients";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateWindow: return "DegenerateWindow";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLayerOutOfRange: return "LayerOutOfRange";
    case ErrorCode::kEmptyResidual: return "EmptyResidual";
    case ErrorCode::kUnreadableInput: return "UnreadableInput";
    case ErrorCode::kInvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace stroke_painter
