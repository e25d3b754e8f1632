#include "ltime/error.hpp"

namespace ltime {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonFiniteSupport: return "NonFiniteSupport";
    case Errc::MeanMismatch: return "MeanMismatch";
    case Errc::NonZeroMean: return "NonZeroMean";
    case Errc::InfeasibleY: return "InfeasibleY";
    case Errc::OutOfRegime: return "OutOfRegime";
    case Errc::OutOfInterval: return "OutOfInterval";
    case Errc::NegativeX: return "NegativeX";
    case Errc::AllPathsCapped: return "AllPathsCapped";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace ltime
