#include "landscape/error.hpp"

namespace landscape {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::AtKink: return "AtKink";
    case ErrorCode::LinearlyFittable: return "LinearlyFittable";
    case ErrorCode::OutputDimNotOne: return "OutputDimNotOne";
    case ErrorCode::HiddenTooNarrow: return "HiddenTooNarrow";
    case ErrorCode::NonPositivePreactivation: return "NonPositivePreactivation";
    case ErrorCode::DuplicateDataPoints: return "DuplicateDataPoints";
    case ErrorCode::BacktrackExhausted: return "BacktrackExhausted";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::CertificateFailed: return "CertificateFailed";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::UnknownActivation: return "UnknownActivation";
    case ErrorCode::InvalidDegree: return "InvalidDegree";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::WidthViolation: return "WidthViolation";
    case ErrorCode::GradientZero: return "GradientZero";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::RadiusExceeded: return "RadiusExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
      return 2;
    case ErrorCode::NonPositivePreactivation:
    case ErrorCode::BacktrackExhausted:
    case ErrorCode::CertificateFailed:
      return 4;
    default:
      return 3;
  }
}

}  // namespace landscape
