#pragma once

#include <stdexcept>
#include <string>

namespace stroke_painter {

enum class ErrorCode {
  kInvalidArgument,
  kNonConvexCoefficients,
  kLengthMismatch,
  kDegenerateWindow,
  kNonFiniteGradient,
  kDimensionMismatch,
  kLayerOutOfRange,
  kEmptyResidual,
  kUnreadableInput,
  kInvalidInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stroke_painter
