#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalforge {

enum class ErrorCode {
  kInvalidGraph,
  kNotADag,
  kInvalidConfig,
  kSimulationOverflow,
  kNumericError,
  kSingularCovariance,
  kInsufficientSamples,
  kSingularDesign,
  kPriorConflict,
  kDegenerateVariable,
  kShapeError,
  kFormatError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::kInvalidGraph:
    return "InvalidGraph";
  case ErrorCode::kNotADag:
    return "NotADag";
  case ErrorCode::kInvalidConfig:
    return "InvalidConfig";
  case ErrorCode::kSimulationOverflow:
    return "SimulationOverflow";
  case ErrorCode::kNumericError:
    return "NumericError";
  case ErrorCode::kSingularCovariance:
    return "SingularCovariance";
  case ErrorCode::kInsufficientSamples:
    return "InsufficientSamples";
  case ErrorCode::kSingularDesign:
    return "SingularDesign";
  case ErrorCode::kPriorConflict:
    return "PriorConflict";
  case ErrorCode::kDegenerateVariable:
    return "DegenerateVariable";
  case ErrorCode::kShapeError:
    return "ShapeError";
  case ErrorCode::kFormatError:
    return "FormatError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }

private:
  ErrorCode code_;
};

} // namespace causalforge
