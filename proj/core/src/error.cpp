#include "vfe/error.hpp"

#include <fmt/format.h>

namespace vfe {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NoTemporalOverlap: return "NoTemporalOverlap";
    case Errc::RateTooLow: return "RateTooLow";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::SignalTooShort: return "SignalTooShort";
    case Errc::NoExtremaFound: return "NoExtremaFound";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::ArraysTooShort: return "ArraysTooShort";
    case Errc::LagAtSearchBoundary: return "LagAtSearchBoundary";
    case Errc::OverlappingSegments: return "OverlappingSegments";
    case Errc::SegmentOutOfBounds: return "SegmentOutOfBounds";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateRange: return "DegenerateRange";
    case Errc::DegenerateColumn: return "DegenerateColumn";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::ZeroVarianceTarget: return "ZeroVarianceTarget";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)), code_(code) {}

Error Error::with_context(std::string_view context) const {
  // what() already carries the code prefix; strip it so it is not repeated.
  std::string_view msg = what();
  const auto prefix = to_string(code_);
  if (msg.starts_with(prefix) && msg.size() > prefix.size() + 2) msg.remove_prefix(prefix.size() + 2);
  return Error(code_, fmt::format("{}: {}", context, msg));
}

}  // namespace vfe
