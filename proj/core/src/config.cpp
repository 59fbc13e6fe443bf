#include "vfe/config.hpp"

#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "vfe/dsp.hpp"
#include "vfe/error.hpp"
#include "vfe/io.hpp"

namespace vfe {

using nlohmann::json;

namespace {

constexpr int kConfigSchemaVersion = 1;

void reject_unknown(const json& obj, std::string_view where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw Error(Errc::InvalidSpec, fmt::format("config '{}' must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw Error(Errc::InvalidSpec, fmt::format("unknown config key '{}{}'", where, key));
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->template get<T>();
}

void read_nullable(const json& obj, const char* key, std::optional<double>& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    if (it->is_null()) {
      out.reset();
    } else {
      out = it->get<double>();
    }
  }
}

Channel read_channel(const json& obj, const char* key, Channel fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const auto c = channel_from_name(it->get<std::string>());
  if (!c) throw Error(Errc::InvalidSpec, fmt::format("unknown channel '{}'", it->get<std::string>()));
  return *c;
}

}  // namespace

void PipelineConfig::validate() const {
  if (sample_rate_hz && !(*sample_rate_hz > 0.0)) throw Error(Errc::InvalidSpec, "sample_rate_hz must be positive");
  if (filter_prototype_order < 1) throw Error(Errc::InvalidSpec, "filter prototype_order must be >= 1");
  if (!(filter_center_hz - filter_bandwidth_hz / 2.0 > 0.0) || !(filter_bandwidth_hz > 0.0)) {
    throw Error(Errc::InvalidSpec, "filter band must lie above 0 Hz");
  }
  if (!(min_peak_spacing_s() > 0.0)) throw Error(Errc::InvalidSpec, "envelope min_peak_spacing_s must be positive");
  if (!(alignment.max_lag_s >= 0.0)) throw Error(Errc::InvalidSpec, "alignment max_lag_s must be >= 0");
  if (index(alignment.accel_reference) >= 3 || index(alignment.gyro_reference) < 3) {
    throw Error(Errc::InvalidSpec, "alignment references must be an accelerometer and a gyroscope channel");
  }
  artifact.validate();
  if (!(lambda >= 0.0)) throw Error(Errc::InvalidSpec, "lambda must be >= 0");
  if (!(outlier_sd_multiplier >= 0.0)) throw Error(Errc::InvalidSpec, "outlier_sd_multiplier must be >= 0");
}

std::string to_json(const PipelineConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["sample_rate_hz"] = c.sample_rate_hz ? json(*c.sample_rate_hz) : json(nullptr);
  j["filter"] = {{"center_hz", c.filter_center_hz},
                 {"bandwidth_hz", c.filter_bandwidth_hz},
                 {"prototype_order", c.filter_prototype_order}};
  j["envelope"] = {{"min_peak_spacing_s",
                    c.envelope_min_peak_spacing_s ? json(*c.envelope_min_peak_spacing_s) : json(nullptr)},
                   {"sinusoid_refinement", c.envelope_sinusoid_refinement}};
  j["alignment"] = {{"accel_reference", std::string(name(c.alignment.accel_reference))},
                    {"gyro_reference", std::string(name(c.alignment.gyro_reference))},
                    {"max_lag_s", c.alignment.max_lag_s},
                    {"negate_envelope", c.alignment.negate_envelope}};
  const auto& a = c.artifact;
  j["artifact"] = {{"enabled", c.repair_artifacts},
                   {"median_filter_enabled", a.median_filter_enabled},
                   {"median_kernel", a.median_kernel},
                   {"deriv_sd_multiplier", a.deriv_sd_multiplier},
                   {"min_duration_s", a.min_duration_s},
                   {"drop_ratio_threshold", a.drop_ratio_threshold},
                   {"recovery_extension_s", a.recovery_extension_s},
                   {"amplitude_window_s", a.amplitude_window_s}};
  j["model"] = {{"kind", std::string(to_string(c.kind))}, {"lambda", c.lambda}};
  j["evaluation"] = {{"outlier_sd_multiplier", c.outlier_sd_multiplier}};
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(std::string_view text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j, "",
                   {"schema_version", "sample_rate_hz", "filter", "envelope", "alignment", "artifact", "model",
                    "evaluation"});
    if (auto it = j.find("schema_version"); it != j.end() && it->get<int>() != kConfigSchemaVersion) {
      throw Error(Errc::InvalidSpec, fmt::format("config schema_version {} is not supported", it->dump()));
    }
    read_nullable(j, "sample_rate_hz", c.sample_rate_hz);
    if (auto it = j.find("filter"); it != j.end()) {
      reject_unknown(*it, "filter.", {"center_hz", "bandwidth_hz", "prototype_order"});
      read_opt(*it, "center_hz", c.filter_center_hz);
      read_opt(*it, "bandwidth_hz", c.filter_bandwidth_hz);
      read_opt(*it, "prototype_order", c.filter_prototype_order);
    }
    if (auto it = j.find("envelope"); it != j.end()) {
      reject_unknown(*it, "envelope.", {"min_peak_spacing_s", "sinusoid_refinement"});
      read_nullable(*it, "min_peak_spacing_s", c.envelope_min_peak_spacing_s);
      read_opt(*it, "sinusoid_refinement", c.envelope_sinusoid_refinement);
    }
    if (auto it = j.find("alignment"); it != j.end()) {
      reject_unknown(*it, "alignment.", {"accel_reference", "gyro_reference", "max_lag_s", "negate_envelope"});
      c.alignment.accel_reference = read_channel(*it, "accel_reference", c.alignment.accel_reference);
      c.alignment.gyro_reference = read_channel(*it, "gyro_reference", c.alignment.gyro_reference);
      read_opt(*it, "max_lag_s", c.alignment.max_lag_s);
      read_opt(*it, "negate_envelope", c.alignment.negate_envelope);
    }
    if (auto it = j.find("artifact"); it != j.end()) {
      reject_unknown(*it, "artifact.",
                     {"enabled", "median_filter_enabled", "median_kernel", "deriv_sd_multiplier", "min_duration_s",
                      "drop_ratio_threshold", "recovery_extension_s", "amplitude_window_s"});
      read_opt(*it, "enabled", c.repair_artifacts);
      read_opt(*it, "median_filter_enabled", c.artifact.median_filter_enabled);
      read_opt(*it, "median_kernel", c.artifact.median_kernel);
      read_opt(*it, "deriv_sd_multiplier", c.artifact.deriv_sd_multiplier);
      read_opt(*it, "min_duration_s", c.artifact.min_duration_s);
      read_opt(*it, "drop_ratio_threshold", c.artifact.drop_ratio_threshold);
      read_opt(*it, "recovery_extension_s", c.artifact.recovery_extension_s);
      read_opt(*it, "amplitude_window_s", c.artifact.amplitude_window_s);
    }
    if (auto it = j.find("model"); it != j.end()) {
      reject_unknown(*it, "model.", {"kind", "lambda"});
      if (auto k = it->find("kind"); k != it->end()) {
        const auto kind = model_kind_from_string(k->get<std::string>());
        if (!kind) throw Error(Errc::InvalidSpec, fmt::format("unknown model kind {}", k->dump()));
        c.kind = *kind;
      }
      read_opt(*it, "lambda", c.lambda);
    }
    if (auto it = j.find("evaluation"); it != j.end()) {
      reject_unknown(*it, "evaluation.", {"outlier_sd_multiplier"});
      read_opt(*it, "outlier_sd_multiplier", c.outlier_sd_multiplier);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidSpec, fmt::format("config: {}", e.what()));
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(io::read_file(path));
}

std::string config_hash(const PipelineConfig& config) {
  return io::sha256_hex(to_json(config));
}

}  // namespace vfe
