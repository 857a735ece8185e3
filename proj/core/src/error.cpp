#include "mppchaos/error.hpp"

#include <iostream>

namespace mppchaos {

namespace {

void default_sink(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

WarningSink g_sink = &default_sink;

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidRates: return "InvalidRates";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::StochasticSupport: return "StochasticSupport";
    case ErrorCode::OutOfHorizon: return "OutOfHorizon";
    case ErrorCode::JumpCapExceeded: return "JumpCapExceeded";
    case ErrorCode::ZeroCompensator: return "ZeroCompensator";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DepthTooLarge: return "DepthTooLarge";
    case ErrorCode::SizeCap: return "SizeCap";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TruncationTooLarge: return "TruncationTooLarge";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::SuiteFailure: return "SuiteFailure";
  }
  return "Unknown";
}

void set_warning_sink(WarningSink sink) { g_sink = sink ? sink : &default_sink; }

void warn(std::string_view message) { g_sink(message); }

}  // namespace mppchaos
