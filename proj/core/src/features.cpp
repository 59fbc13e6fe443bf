#include "vfe/features.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vfe/error.hpp"

namespace vfe {

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Absolute ? "absolute" : "relative";
}

std::optional<ModelKind> model_kind_from_string(std::string_view s) noexcept {
  if (s == "absolute") return ModelKind::Absolute;
  if (s == "relative") return ModelKind::Relative;
  return std::nullopt;
}

}  // namespace vfe

namespace vfe::features {

const std::vector<std::string>& absolute_columns() {
  static const std::vector<std::string> cols{"accel_x", "accel_y", "accel_z", "gyro_x",
                                             "gyro_y",  "gyro_z",  "accel_mag", "gyro_mag"};
  return cols;
}

const std::vector<std::string>& relative_columns() {
  static const std::vector<std::string> cols{"accel_x_pct", "gyro_y_pct"};
  return cols;
}

const std::vector<std::string>& columns_for(ModelKind kind) {
  return kind == ModelKind::Absolute ? absolute_columns() : relative_columns();
}

double percentile(std::span<const double> x, double p) {
  if (x.empty()) throw Error(Errc::DegenerateRange, "percentile of an empty series");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

ScalingAnchors::ScalingAnchors(double p5, double p95) : p5_(p5), p95_(p95) {
  if (!(p95 > p5)) {
    throw Error(Errc::DegenerateRange, fmt::format("95th percentile {} is not above 5th percentile {}", p95, p5));
  }
}

ScaledSignal percentile_scale(std::span<const double> signal) {
  ScalingAnchors anchors(percentile(signal, 5.0), percentile(signal, 95.0));
  std::vector<double> out(signal.size());
  std::transform(signal.begin(), signal.end(), out.begin(), [&](double v) { return anchors.scale(v); });
  return {std::move(out), anchors};
}

std::vector<double> magnitude(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw Error(Errc::LengthMismatch,
                fmt::format("magnitude inputs have lengths {}, {}, {}", x.size(), y.size(), z.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  return out;
}

std::vector<double> newtons_to_pounds(std::span<const double> force_n) {
  std::vector<double> out(force_n.size());
  // f * 224809 is exact for whole newtons, so the division is the only
  // rounding and 100 N lands exactly on 22.4809.
  std::transform(force_n.begin(), force_n.end(), out.begin(), [](double f) { return f * 224809.0 / 1e6; });
  return out;
}

void FeatureMatrix::check() const {
  if (values.size() != n_samples * n_columns()) {
    throw Error(Errc::SchemaViolation, fmt::format("feature matrix holds {} values for {} x {}", values.size(),
                                                   n_samples, n_columns()));
  }
  if (!target.empty() && target.size() != n_samples) {
    throw Error(Errc::SchemaViolation, "target length differs from the number of rows");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(Errc::NonFiniteValue,
                  fmt::format("feature row {} column {} is not finite", i / n_columns(), i % n_columns()));
    }
  }
  for (double t : target) {
    if (!std::isfinite(t)) throw Error(Errc::NonFiniteValue, "non-finite target value");
  }
}

namespace {

FeatureMatrix assemble(ModelKind kind, const align::AlignedSession& aligned, std::string_view session_id,
                       const std::vector<const std::vector<double>*>& columns) {
  const std::size_t n = aligned.common_length;
  FeatureMatrix fm;
  fm.kind = kind;
  fm.column_names = columns_for(kind);
  fm.n_samples = n;
  fm.values.resize(n * columns.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) fm.values[r * columns.size() + c] = (*columns[c])[r];
  }
  fm.time_s.resize(n);
  for (std::size_t r = 0; r < n; ++r) fm.time_s[r] = aligned.time_at(r);
  fm.provenance.push_back({std::string(session_id), 0, n});
  return fm;
}

}  // namespace

FeatureMatrix build_absolute_features(const align::AlignedSession& aligned, std::string_view session_id) {
  const auto& imu = aligned.imu;
  const auto accel_mag = magnitude(imu[0], imu[1], imu[2]);
  const auto gyro_mag = magnitude(imu[3], imu[4], imu[5]);
  FeatureMatrix fm = assemble(ModelKind::Absolute, aligned, session_id,
                              {&imu[0], &imu[1], &imu[2], &imu[3], &imu[4], &imu[5], &accel_mag, &gyro_mag});
  if (!aligned.force_n.empty()) fm.target = newtons_to_pounds(aligned.force_n);
  fm.check();
  return fm;
}

FeatureMatrix build_relative_features(const align::AlignedSession& aligned, std::string_view session_id) {
  auto scaled_channel = [&](Channel c) {
    try {
      return percentile_scale(aligned.imu[index(c)]).values;
    } catch (const Error& e) {
      throw e.with_context(name(c));
    }
  };
  const auto accel = scaled_channel(Channel::AccelX);
  const auto gyro = scaled_channel(Channel::GyroY);
  FeatureMatrix fm = assemble(ModelKind::Relative, aligned, session_id, {&accel, &gyro});
  if (!aligned.force_n.empty()) {
    try {
      fm.target = percentile_scale(aligned.force_n).values;
    } catch (const Error& e) {
      throw e.with_context("force");
    }
  }
  fm.check();
  return fm;
}

FeatureMatrix build_features(ModelKind kind, const align::AlignedSession& aligned, std::string_view session_id) {
  return kind == ModelKind::Absolute ? build_absolute_features(aligned, session_id)
                                     : build_relative_features(aligned, session_id);
}

FeatureMatrix concatenate(std::span<const FeatureMatrix> parts) {
  FeatureMatrix out;
  if (parts.empty()) return out;
  out.kind = parts.front().kind;
  out.column_names = parts.front().column_names;
  for (const auto& p : parts) {
    if (p.column_names != out.column_names || p.kind != out.kind) {
      throw Error(Errc::SchemaMismatch, "cannot concatenate feature matrices with different columns");
    }
    if (p.has_target() != parts.front().has_target()) {
      throw Error(Errc::SchemaMismatch, "cannot mix feature matrices with and without targets");
    }
    for (const auto& block : p.provenance) {
      out.provenance.push_back({block.session_id, block.begin + out.n_samples, block.end + out.n_samples});
    }
    out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    out.target.insert(out.target.end(), p.target.begin(), p.target.end());
    out.time_s.insert(out.time_s.end(), p.time_s.begin(), p.time_s.end());
    out.n_samples += p.n_samples;
  }
  return out;
}

}  // namespace vfe::features
