#include "srbeam/errors.hpp"

namespace srbeam {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DegenerateChannel: return "DegenerateChannel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace srbeam
