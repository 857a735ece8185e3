#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mppchaos {

enum class ErrorCode {
  InvalidArgument,
  InvalidRates,
  InvalidKernel,
  SupportMismatch,
  StochasticSupport,
  OutOfHorizon,
  JumpCapExceeded,
  ZeroCompensator,
  GridTooCoarse,
  ArityMismatch,
  DepthTooLarge,
  SizeCap,
  DimensionMismatch,
  TruncationTooLarge,
  Unsupported,
  ConfigError,
  TooFewSamples,
  SuiteFailure,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` identifies
// the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Warnings are routed through a replaceable sink (stderr by default).
using WarningSink = void (*)(std::string_view message);
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace mppchaos
