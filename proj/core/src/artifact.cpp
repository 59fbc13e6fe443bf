#include "vfe/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "vfe/dsp.hpp"
#include "vfe/error.hpp"

namespace vfe::artifact {

void ArtifactParams::validate() const {
  if (median_kernel < 3 || median_kernel % 2 == 0) {
    throw Error(Errc::InvalidSpec, fmt::format("median_kernel {} must be odd and >= 3", median_kernel));
  }
  if (!(deriv_sd_multiplier > 0.0) || !(min_duration_s > 0.0) || !(drop_ratio_threshold > 0.0) ||
      !(recovery_extension_s > 0.0) || !(amplitude_window_s > 0.0)) {
    throw Error(Errc::InvalidSpec, "artifact thresholds must be positive");
  }
}

namespace {

double median_of(std::span<const double> x) {
  std::vector<double> tmp(x.begin(), x.end());
  const std::size_t n = tmp.size();
  auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(tmp.begin(), mid, tmp.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(tmp.begin(), mid);
  return 0.5 * (lo + hi);
}

std::size_t samples_for(double seconds, double rate) {
  return static_cast<std::size_t>(std::lround(seconds * rate));
}

}  // namespace

std::vector<DropoutSegment> detect_dropouts(std::span<const double> envelope, double sample_rate_hz,
                                            const ArtifactParams& params) {
  params.validate();
  const std::size_t n = envelope.size();
  if (static_cast<double>(n) <= 2.0 * params.min_duration_s * sample_rate_hz) {
    throw Error(Errc::SignalTooShort,
                fmt::format("dropout detection needs more than {} samples, got {}",
                            2.0 * params.min_duration_s * sample_rate_hz, n));
  }

  const std::vector<double> smooth = params.median_filter_enabled
                                         ? dsp::median_filter(envelope, params.median_kernel)
                                         : std::vector<double>(envelope.begin(), envelope.end());

  std::vector<double> deriv(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) deriv[i] = smooth[i + 1] - smooth[i];
  const double mean = std::accumulate(deriv.begin(), deriv.end(), 0.0) / static_cast<double>(deriv.size());
  double var = 0.0;
  for (double d : deriv) var += (d - mean) * (d - mean);
  const double sd = std::sqrt(var / static_cast<double>(deriv.size()));
  if (!(sd > 0.0)) return {};
  const double threshold = params.deriv_sd_multiplier * sd;

  auto is_fall = [&](std::size_t i) { return deriv[i] < -threshold; };
  auto is_rise = [&](std::size_t i) { return deriv[i] > threshold; };

  const double min_len = params.min_duration_s * sample_rate_hz - 1e-9;
  const std::size_t window = std::max<std::size_t>(1, samples_for(params.amplitude_window_s, sample_rate_hz));

  std::vector<DropoutSegment> out;
  auto consider = [&](std::size_t start, std::size_t end) {
    if (static_cast<double>(end - start) < min_len) return;
    const std::size_t pre_lo = start > window ? start - window : 0;
    DropoutSegment seg;
    seg.start = start;
    seg.end = end;
    seg.pre_amplitude = median_of(envelope.subspan(pre_lo, start - pre_lo));
    seg.in_amplitude = median_of(envelope.subspan(start, end - start));
    seg.drop_ratio = seg.pre_amplitude / std::max(seg.in_amplitude, kDropRatioEpsilon);
    if (seg.drop_ratio >= params.drop_ratio_threshold) out.push_back(seg);
  };

  // Each rise pairs with the most recent falling run; earlier unmatched
  // falls (noise) are dropped so they cannot swallow a real collapse. The
  // segment ends at the first risen sample; the recovery ramp after it is
  // covered by the repair extension.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t fall_start = kNone;
  for (std::size_t i = 0; i < deriv.size(); ++i) {
    if (is_fall(i)) {
      if (i == 0 || !is_fall(i - 1)) fall_start = i + 1;
    } else if (is_rise(i) && fall_start != kNone) {
      consider(fall_start, i + 1);
      fall_start = kNone;
    }
  }
  if (fall_start != kNone) consider(fall_start, n);
  return out;
}

std::vector<double> repair_dropouts(std::span<const double> envelope, std::span<const DropoutSegment> segments,
                                    double sample_rate_hz, const ArtifactParams& params) {
  params.validate();
  const std::size_t n = envelope.size();
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    if (!(s.start < s.end) || s.end > n) {
      throw Error(Errc::SegmentOutOfBounds,
                  fmt::format("segment [{}, {}) is empty or outside [0, {})", s.start, s.end, n));
    }
    if (k > 0 && s.start < segments[k - 1].end) {
      throw Error(Errc::OverlappingSegments,
                  fmt::format("segment [{}, {}) overlaps or precedes [{}, {})", s.start, s.end,
                              segments[k - 1].start, segments[k - 1].end));
    }
  }

  std::vector<double> out(envelope.begin(), envelope.end());
  const std::size_t extension = samples_for(params.recovery_extension_s, sample_rate_hz);

  std::size_t k = 0;
  while (k < segments.size()) {
    const std::size_t start = segments[k].start;
    std::size_t stop = std::min(n, segments[k].end + extension);
    // A recovery ramp running into the next segment joins the two.
    while (k + 1 < segments.size() && stop > segments[k + 1].start) {
      ++k;
      stop = std::max(stop, std::min(n, segments[k].end + extension));
    }
    ++k;

    const std::optional<double> left = start > 0 ? std::optional(envelope[start - 1]) : std::nullopt;
    const std::optional<double> right = stop < n ? std::optional(envelope[stop]) : std::nullopt;
    if (!left && !right) {
      throw Error(Errc::SegmentOutOfBounds, "segment covers the whole signal; nothing to interpolate from");
    }
    const double a = left.value_or(*right);
    const double b = right.value_or(*left);
    const double span = static_cast<double>(stop - start + 1);
    for (std::size_t i = start; i < stop; ++i) {
      out[i] = a + (b - a) * static_cast<double>(i - start + 1) / span;
    }
  }
  return out;
}

}  // namespace vfe::artifact
