#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "vfe/alignment.hpp"
#include "vfe/artifact.hpp"
#include "vfe/features.hpp"
#include "vfe/model.hpp"

namespace vfe {

// Every tunable of the signal chain and the model fit. JSON form is
// canonical (sorted keys, fixed number formatting), so the hash depends on
// values only.
struct PipelineConfig {
  // Resampling rate; nullopt uses the IMU's native rate.
  std::optional<double> sample_rate_hz;

  double filter_center_hz = 136.0;
  double filter_bandwidth_hz = 10.0;
  int filter_prototype_order = 4;

  // nullopt means half a carrier period.
  std::optional<double> envelope_min_peak_spacing_s;
  bool envelope_sinusoid_refinement = true;

  align::AlignmentParams alignment;
  artifact::ArtifactParams artifact;
  bool repair_artifacts = true;

  ModelKind kind = ModelKind::Absolute;
  double lambda = model::kDefaultLambda;
  double outlier_sd_multiplier = 2.0;

  double min_peak_spacing_s() const noexcept {
    return envelope_min_peak_spacing_s.value_or(0.5 / filter_center_hz);
  }

  // Throws Error(InvalidSpec).
  void validate() const;
};

std::string to_json(const PipelineConfig& config);

// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

// SHA-256 of the canonical JSON form.
std::string config_hash(const PipelineConfig& config);

}  // namespace vfe
