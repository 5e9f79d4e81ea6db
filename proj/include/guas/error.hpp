#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace guas {

enum class ErrorCode {
  DimensionMismatch,
  NotPositiveDefinite,
  LambdaOutOfRange,
  StructureViolation,
  InNullSpace,
  NotInF,
  DimensionTooLarge,
  StepTooLarge,
  NotHurwitz,
  NoCommonWeakLyapunov,
  InternalInconsistency,
  NoOutputs,
  BadSignalSpec,
  UnknownExample,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported through this type; `code()` is what
/// callers (notably the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace guas
