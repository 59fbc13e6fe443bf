#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfe/alignment.hpp"

namespace vfe {

enum class ModelKind { Absolute, Relative };

std::string_view to_string(ModelKind kind) noexcept;
std::optional<ModelKind> model_kind_from_string(std::string_view s) noexcept;

}  // namespace vfe

namespace vfe::features {

inline constexpr double kNewtonsToPounds = 0.224809;
inline constexpr int kFeatureSchemaVersion = 1;

// Frozen column orders; trained models refuse anything else.
const std::vector<std::string>& absolute_columns();
const std::vector<std::string>& relative_columns();
const std::vector<std::string>& columns_for(ModelKind kind);

// Linear interpolation between order statistics at rank p/100 * (n - 1).
double percentile(std::span<const double> x, double p);

class ScalingAnchors {
 public:
  // Throws Error(DegenerateRange) unless p95 > p5.
  ScalingAnchors(double p5, double p95);

  double p5() const noexcept { return p5_; }
  double p95() const noexcept { return p95_; }
  double scale(double x) const noexcept { return 100.0 * (x - p5_) / (p95_ - p5_); }
  double unscale(double pct) const noexcept { return p5_ + pct / 100.0 * (p95_ - p5_); }

 private:
  double p5_;
  double p95_;
};

struct ScaledSignal {
  std::vector<double> values;  // percent; tails outside [0, 100] are kept
  ScalingAnchors anchors;
};

ScaledSignal percentile_scale(std::span<const double> signal);

std::vector<double> magnitude(std::span<const double> x, std::span<const double> y, std::span<const double> z);

std::vector<double> newtons_to_pounds(std::span<const double> force_n);

// Contiguous rows that came from one session.
struct RowBlock {
  std::string session_id;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Row-major feature rows with their targets (lb or percent).
struct FeatureMatrix {
  ModelKind kind = ModelKind::Absolute;
  std::vector<std::string> column_names;
  std::size_t n_samples = 0;
  std::vector<double> values;  // n_samples * n_columns
  std::vector<double> target;  // empty when built without force
  std::vector<double> time_s;  // per-row timestamp on the session clock
  std::vector<RowBlock> provenance;

  std::size_t n_columns() const noexcept { return column_names.size(); }
  double at(std::size_t row, std::size_t col) const noexcept { return values[row * n_columns() + col]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values.data() + r * n_columns(), n_columns()};
  }
  bool has_target() const noexcept { return target.size() == n_samples && n_samples > 0; }

  // Throws Error(SchemaViolation) if sizes disagree or an entry is non-finite.
  void check() const;
};

// Eight columns: six envelopes then the accelerometer and gyroscope
// magnitudes; target is force in pounds.
FeatureMatrix build_absolute_features(const align::AlignedSession& aligned, std::string_view session_id);

// Percentile-scaled accel_x and gyro_y envelopes; target is percentile-scaled
// force (per session anchors).
FeatureMatrix build_relative_features(const align::AlignedSession& aligned, std::string_view session_id);

FeatureMatrix build_features(ModelKind kind, const align::AlignedSession& aligned, std::string_view session_id);

// Stacks matrices with identical columns, keeping provenance.
FeatureMatrix concatenate(std::span<const FeatureMatrix> parts);

}  // namespace vfe::features
