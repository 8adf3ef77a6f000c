#include "mpfb/error.hpp"

namespace mpfb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidRange: return "invalid-range";
    case ErrorCode::InvalidScale: return "invalid-scale";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::UnsupportedRepresentation: return "unsupported-representation";
    case ErrorCode::InsufficientSampling: return "insufficient-sampling";
    case ErrorCode::UndefinedRatio: return "undefined-ratio";
    case ErrorCode::SingularFrequency: return "singular-frequency";
    case ErrorCode::InvalidTime: return "invalid-time";
    case ErrorCode::InvalidMatrix: return "invalid-matrix";
    case ErrorCode::StepTooLarge: return "step-too-large";
    case ErrorCode::BlowUpSuspected: return "blow-up-suspected";
    case ErrorCode::TimeResolution: return "time-resolution";
    case ErrorCode::DegenerateRange: return "degenerate-range";
    case ErrorCode::EmptySupport: return "empty-support";
    case ErrorCode::Accuracy: return "accuracy";
    case ErrorCode::Resolution: return "resolution";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::CalibrationAborted: return "calibration-aborted";
  }
  return "unknown";
}

}  // namespace mpfb
