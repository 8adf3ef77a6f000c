#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpfb {

enum class ErrorCode {
  InvalidRange,
  InvalidScale,
  InvalidParameter,
  UnsupportedRepresentation,
  InsufficientSampling,
  UndefinedRatio,
  SingularFrequency,
  InvalidTime,
  InvalidMatrix,
  StepTooLarge,
  BlowUpSuspected,
  TimeResolution,
  DegenerateRange,
  EmptySupport,
  Accuracy,
  Resolution,
  Config,
  Io,
  CalibrationAborted,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every module. The code lets the CLI map failures to
/// exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Config and I/O errors are usage problems; everything else is numeric.
  bool is_usage_error() const noexcept {
    return code_ == ErrorCode::Config || code_ == ErrorCode::Io;
  }

 private:
  ErrorCode code_;
};

}  // namespace mpfb
