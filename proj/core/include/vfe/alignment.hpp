#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vfe/session.hpp"

namespace vfe::align {

// Positive lag: the target lags the reference, target[n + lag] ~ reference[n].
struct LagEstimate {
  long lag_samples = 0;
  double peak_correlation = 0.0;
  long max_lag_searched = 0;
};

// Pearson correlation between reference[n] and target[n + k] over their
// overlap, for k = -max_lag .. +max_lag (index k + max_lag). Lags whose
// overlap has zero variance score 0.
std::vector<double> correlation_curve(std::span<const double> reference, std::span<const double> target,
                                      long max_lag);

// argmax of |correlation|; ties go to the smallest |k|, then to negative k.
LagEstimate estimate_lag(std::span<const double> reference, std::span<const double> target, long max_lag);

struct AlignmentParams {
  Channel accel_reference = Channel::AccelX;
  Channel gyro_reference = Channel::GyroY;
  double max_lag_s = 2.0;
  // Force damps vibration, so the envelope is correlated in negated form.
  bool negate_envelope = true;
};

struct AlignedSession {
  double sample_rate_hz = 0.0;
  double start_s = 0.0;  // time of aligned sample 0 on the force clock
  PerChannel<std::vector<double>> imu;
  std::vector<double> force_n;  // empty when aligned without force
  std::size_t common_length = 0;
  LagEstimate accel_lag;
  LagEstimate gyro_lag;
  // Index into the pre-alignment grid of each channel's first kept sample.
  PerChannel<std::size_t> source_offset{};

  double time_at(std::size_t i) const noexcept {
    return start_s + static_cast<double>(i) / sample_rate_hz;
  }
};

// Estimates one lag per sensor group against force, shifts each group
// earlier by its lag and truncates every series to the common length.
AlignedSession align_session(const session::UniformSession& envelopes, const AlignmentParams& params);

// Wraps envelopes with zero lags (prediction without ground-truth force).
AlignedSession unaligned_session(const session::UniformSession& envelopes);

// Applies explicit per-group lags (validated against the series length).
AlignedSession apply_lags(const session::UniformSession& envelopes, const LagEstimate& accel_lag,
                          const LagEstimate& gyro_lag);

}  // namespace vfe::align
