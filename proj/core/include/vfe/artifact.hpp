#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vfe::artifact {

struct ArtifactParams {
  bool median_filter_enabled = true;
  std::size_t median_kernel = 5;
  double deriv_sd_multiplier = 1.0;
  double min_duration_s = 0.12;
  double drop_ratio_threshold = 500.0;
  double recovery_extension_s = 0.02;
  // Window before a segment used for its reference amplitude.
  double amplitude_window_s = 0.1;

  void validate() const;  // throws Error(InvalidSpec)
};

inline constexpr double kDropRatioEpsilon = 1e-12;

// Half-open sample range [start, end).
struct DropoutSegment {
  std::size_t start = 0;
  std::size_t end = 0;
  double pre_amplitude = 0.0;
  double in_amplitude = 0.0;
  double drop_ratio = 0.0;

  std::size_t length() const noexcept { return end - start; }
};

// Collapse segments: from the latest falling derivative spike to the first
// rising one after it, at least min_duration_s long and at least
// drop_ratio_threshold times below the median amplitude just before the fall.
std::vector<DropoutSegment> detect_dropouts(std::span<const double> envelope, double sample_rate_hz,
                                            const ArtifactParams& params = {});

// Replaces each segment, extended by the recovery period, with the chord
// between the samples bordering it. Segments touching an array end are
// filled flat from the surviving side.
std::vector<double> repair_dropouts(std::span<const double> envelope, std::span<const DropoutSegment> segments,
                                    double sample_rate_hz, const ArtifactParams& params = {});

}  // namespace vfe::artifact
