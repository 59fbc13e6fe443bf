#include "vfe/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <fmt/format.h>

#include "vfe/error.hpp"

namespace vfe::align {

namespace {

std::vector<double> demeaned(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [mean](double v) { return v - mean; });
  return out;
}

bool has_variance(std::span<const double> x) {
  return std::any_of(x.begin(), x.end(), [&](double v) { return v != x.front(); });
}

// prefix[i] = sum of x[0..i)
std::vector<double> prefix_sum(const std::vector<double>& x, bool squared) {
  std::vector<double> p(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) p[i + 1] = p[i] + (squared ? x[i] * x[i] : x[i]);
  return p;
}

bool is_group_member(Channel c, bool accel) { return (index(c) < 3) == accel; }

}  // namespace

std::vector<double> correlation_curve(std::span<const double> reference, std::span<const double> target,
                                      long max_lag) {
  if (max_lag < 0) throw Error(Errc::InvalidSpec, "max_lag must be non-negative");
  const auto need = static_cast<std::size_t>(2 * max_lag);
  if (reference.size() <= need || target.size() <= need) {
    throw Error(Errc::ArraysTooShort,
                fmt::format("arrays of length {} and {} must exceed 2 * max_lag = {}", reference.size(),
                            target.size(), need));
  }
  if (!has_variance(reference) || !has_variance(target)) {
    throw Error(Errc::ZeroVariance, "cross-correlation input has zero variance");
  }

  // Global de-meaning keeps the prefix-sum variances well conditioned.
  const auto r = demeaned(reference);
  const auto t = demeaned(target);
  const auto pr = prefix_sum(r, false);
  const auto pr2 = prefix_sum(r, true);
  const auto pt = prefix_sum(t, false);
  const auto pt2 = prefix_sum(t, true);
  const auto nr = static_cast<long>(r.size());
  const auto nt = static_cast<long>(t.size());

  std::vector<double> curve(static_cast<std::size_t>(2 * max_lag + 1), 0.0);
  for (long k = -max_lag; k <= max_lag; ++k) {
    const long lo = std::max(0L, -k);
    const long hi = std::min(nr, nt - k);
    const long m = hi - lo;
    if (m < 2) continue;
    double cross = 0.0;
    for (long n = lo; n < hi; ++n) cross += r[static_cast<std::size_t>(n)] * t[static_cast<std::size_t>(n + k)];
    const auto ulo = static_cast<std::size_t>(lo);
    const auto uhi = static_cast<std::size_t>(hi);
    const auto tlo = static_cast<std::size_t>(lo + k);
    const auto thi = static_cast<std::size_t>(hi + k);
    const double dm = static_cast<double>(m);
    const double sr = pr[uhi] - pr[ulo];
    const double st = pt[thi] - pt[tlo];
    const double var_r = (pr2[uhi] - pr2[ulo]) - sr * sr / dm;
    const double var_t = (pt2[thi] - pt2[tlo]) - st * st / dm;
    if (!(var_r > 0.0) || !(var_t > 0.0)) continue;
    const double c = (cross - sr * st / dm) / std::sqrt(var_r * var_t);
    curve[static_cast<std::size_t>(k + max_lag)] = std::clamp(c, -1.0, 1.0);
  }
  return curve;
}

LagEstimate estimate_lag(std::span<const double> reference, std::span<const double> target, long max_lag) {
  const auto curve = correlation_curve(reference, target, max_lag);
  LagEstimate best{0, 0.0, max_lag};
  double best_score = -1.0;
  for (long k = -max_lag; k <= max_lag; ++k) {
    const double c = curve[static_cast<std::size_t>(k + max_lag)];
    const double score = std::abs(c);
    const bool better = score > best_score ||
                        (score == best_score && (std::labs(k) < std::labs(best.lag_samples) ||
                                                 (std::labs(k) == std::labs(best.lag_samples) && k < best.lag_samples)));
    if (better) {
      best_score = score;
      best.lag_samples = k;
      best.peak_correlation = c;
    }
  }
  return best;
}

AlignedSession apply_lags(const session::UniformSession& env, const LagEstimate& accel_lag,
                          const LagEstimate& gyro_lag) {
  const long la = accel_lag.lag_samples;
  const long lg = gyro_lag.lag_samples;
  const auto n = static_cast<long>(env.size());
  const long front = std::max({0L, -la, -lg});
  const long back = std::max({0L, la, lg});
  const long common = n - front - back;
  if (common < 2) {
    throw Error(Errc::ArraysTooShort,
                fmt::format("lags {} / {} leave no common samples out of {}", la, lg, n));
  }
  if (!env.force_n.empty() && static_cast<long>(env.force_n.size()) != n) {
    throw Error(Errc::LengthMismatch, "force and IMU envelopes differ in length");
  }

  AlignedSession out;
  out.sample_rate_hz = env.sample_rate_hz;
  out.start_s = env.time_at(static_cast<std::size_t>(front));
  out.common_length = static_cast<std::size_t>(common);
  out.accel_lag = accel_lag;
  out.gyro_lag = gyro_lag;
  for (std::size_t c = 0; c < kImuChannels; ++c) {
    const long lag = is_group_member(static_cast<Channel>(c), true) ? la : lg;
    const auto offset = static_cast<std::size_t>(front + lag);
    out.source_offset[c] = offset;
    const auto& src = env.imu[c];
    out.imu[c].assign(src.begin() + static_cast<std::ptrdiff_t>(offset),
                      src.begin() + static_cast<std::ptrdiff_t>(offset) + common);
  }
  if (!env.force_n.empty()) {
    out.force_n.assign(env.force_n.begin() + front, env.force_n.begin() + front + common);
  }
  return out;
}

AlignedSession unaligned_session(const session::UniformSession& env) {
  return apply_lags(env, {}, {});
}

AlignedSession align_session(const session::UniformSession& env, const AlignmentParams& params) {
  if (env.force_n.empty()) {
    throw Error(Errc::InvalidSpec, "alignment needs the force series");
  }
  if (!is_group_member(params.accel_reference, true) || !is_group_member(params.gyro_reference, false)) {
    throw Error(Errc::InvalidSpec, "accelerometer/gyroscope reference channels are swapped");
  }
  const auto max_lag = static_cast<long>(std::lround(params.max_lag_s * env.sample_rate_hz));

  auto group_lag = [&](Channel ref, std::string_view group) {
    std::vector<double> target = env.imu[index(ref)];
    if (params.negate_envelope) {
      for (double& v : target) v = -v;
    }
    LagEstimate lag;
    try {
      lag = estimate_lag(env.force_n, target, max_lag);
    } catch (const Error& e) {
      throw e.with_context(fmt::format("{} reference {}", group, name(ref)));
    }
    if (max_lag > 0 && std::labs(lag.lag_samples) == max_lag) {
      throw Error(Errc::LagAtSearchBoundary,
                  fmt::format("{} lag {} hit the search boundary +/-{}", group, lag.lag_samples, max_lag));
    }
    return lag;
  };

  const LagEstimate accel = group_lag(params.accel_reference, "accelerometer");
  const LagEstimate gyro = group_lag(params.gyro_reference, "gyroscope");
  return apply_lags(env, accel, gyro);
}

}  // namespace vfe::align
