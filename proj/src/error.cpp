#include "guas/error.hpp"

namespace guas {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::StructureViolation: return "StructureViolation";
    case ErrorCode::InNullSpace: return "InNullSpace";
    case ErrorCode::NotInF: return "NotInF";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::NoCommonWeakLyapunov: return "NoCommonWeakLyapunov";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::NoOutputs: return "NoOutputs";
    case ErrorCode::BadSignalSpec: return "BadSignalSpec";
    case ErrorCode::UnknownExample: return "UnknownExample";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace guas
