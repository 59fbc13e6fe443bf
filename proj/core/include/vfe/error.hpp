#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vfe {

enum class Errc {
  // session data
  MissingFile,
  SchemaViolation,
  NonMonotonicTimestamps,
  NonFiniteValue,
  NoTemporalOverlap,
  RateTooLow,
  // signal chain
  InvalidSpec,
  SignalTooShort,
  NoExtremaFound,
  ZeroVariance,
  ArraysTooShort,
  LagAtSearchBoundary,
  OverlappingSegments,
  SegmentOutOfBounds,
  LengthMismatch,
  DegenerateRange,
  // model
  DegenerateColumn,
  SingularSystem,
  SchemaMismatch,
  SchemaVersionMismatch,
  CorruptFile,
  // evaluation
  ZeroVarianceTarget,
  // plumbing
  IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

  // Same error with "<context>: " prepended to the message.
  Error with_context(std::string_view context) const;

 private:
  Errc code_;
};

}  // namespace vfe
