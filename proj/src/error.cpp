#include "ptrack/error.hpp"

namespace ptrack {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidMeasurement: return "invalid measurement";
    case Errc::Numeric: return "numeric error";
    case Errc::DegenerateTransform: return "degenerate transform";
    case Errc::NoMotionEstimate: return "no motion estimate";
    case Errc::InvalidInput: return "invalid input";
    case Errc::InvalidAltitude: return "invalid altitude";
    case Errc::InvalidScore: return "invalid score";
    case Errc::Internal: return "internal invariant violated";
    case Errc::DegeneratePatch: return "degenerate patch";
    case Errc::Shape: return "shape mismatch";
    case Errc::Sequencing: return "frame sequencing error";
    case Errc::DivisionDomain: return "division domain error";
    case Errc::UndefinedCorrelation: return "undefined correlation";
    case Errc::CostDomain: return "cost domain error";
    case Errc::Config: return "configuration error";
    case Errc::Parse: return "parse error";
    case Errc::Format: return "format error";
  }
  return "unknown error";
}

bool is_input_error(Errc code) noexcept {
  switch (code) {
    case Errc::Numeric:
    case Errc::Internal:
      return false;
    default:
      return true;
  }
}

}  // namespace ptrack
