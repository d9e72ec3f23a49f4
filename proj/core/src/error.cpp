#include "krisk/error.hpp"

namespace krisk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::OutOfBox: return "OutOfBox";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::AllRestartsFailed: return "AllRestartsFailed";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace krisk
