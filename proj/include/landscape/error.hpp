#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace landscape {

enum class ErrorCode {
  ShapeMismatch,
  NonFinite,
  ZeroMatrix,
  AtKink,
  LinearlyFittable,
  OutputDimNotOne,
  HiddenTooNarrow,
  NonPositivePreactivation,
  DuplicateDataPoints,
  BacktrackExhausted,
  ConditionViolated,
  CertificateFailed,
  DerivativeUnavailable,
  UnknownActivation,
  InvalidDegree,
  IndexOutOfRange,
  NotCritical,
  WidthViolation,
  GradientZero,
  RankDeficient,
  RadiusExceeded,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a failure: 2 input/parse, 3 precondition, 4 numeric certification.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by gradient() when a piecewise-linear unit sits on its kink.
// Each entry is (hidden unit, sample).
class AtKinkError : public Error {
 public:
  AtKinkError(std::vector<std::pair<long, long>> where, const std::string& message)
      : Error(ErrorCode::AtKink, message), where_(std::move(where)) {}

  const std::vector<std::pair<long, long>>& where() const noexcept { return where_; }

 private:
  std::vector<std::pair<long, long>> where_;
};

}  // namespace landscape
