#include "vfe/pipeline.hpp"

#include <future>

#include <fmt/format.h>

#include "vfe/error.hpp"

namespace vfe::pipeline {

namespace {

PipelineTrace run_unchecked(const session::SessionRecording& s, const PipelineConfig& cfg, AlignMode mode) {
  PipelineTrace tr;
  const double rate = cfg.sample_rate_hz.value_or(session::native_imu_rate(s));
  const double nyquist_floor = 2.0 * (cfg.filter_center_hz + cfg.filter_bandwidth_hz / 2.0);

  session::SessionRecording source = s;
  if (mode == AlignMode::Skip) source.force = {};
  tr.uniform = session::resample_to_uniform(source, rate, nyquist_floor);

  tr.filter = dsp::design_bandpass({cfg.filter_center_hz, cfg.filter_bandwidth_hz, cfg.filter_prototype_order, rate});
  const dsp::EnvelopeOptions env_opts{cfg.min_peak_spacing_s(),
                                      cfg.envelope_sinusoid_refinement ? cfg.filter_center_hz : 0.0};

  session::UniformSession env_grid;
  env_grid.sample_rate_hz = tr.uniform.sample_rate_hz;
  env_grid.start_s = tr.uniform.start_s;
  env_grid.force_n = tr.uniform.force_n;
  for (std::size_t c = 0; c < kImuChannels; ++c) {
    try {
      tr.filtered[c] = dsp::filter_zero_phase(tr.uniform.imu[c], tr.filter);
      tr.envelopes[c] = dsp::full_envelope(tr.filtered[c], rate, env_opts);
    } catch (const Error& e) {
      throw e.with_context(kChannelNames[c]);
    }
    env_grid.imu[c] = tr.envelopes[c].values;
  }

  tr.aligned = mode == AlignMode::WithForce ? align::align_session(env_grid, cfg.alignment)
                                            : align::unaligned_session(env_grid);

  tr.repaired = tr.aligned;
  if (cfg.repair_artifacts) {
    for (std::size_t c = 0; c < kImuChannels; ++c) {
      try {
        tr.segments[c] = artifact::detect_dropouts(tr.aligned.imu[c], rate, cfg.artifact);
        tr.repaired.imu[c] = artifact::repair_dropouts(tr.aligned.imu[c], tr.segments[c], rate, cfg.artifact);
      } catch (const Error& e) {
        throw e.with_context(kChannelNames[c]);
      }
    }
  }

  tr.features = features::build_features(cfg.kind, tr.repaired, s.session_id);
  return tr;
}

}  // namespace

PipelineTrace run(const session::SessionRecording& s, const PipelineConfig& cfg, AlignMode mode) {
  try {
    return run_unchecked(s, cfg, mode);
  } catch (const Error& e) {
    throw e.with_context(fmt::format("session {}", s.session_id));
  }
}

features::FeatureMatrix session_features(const session::SessionRecording& s, const PipelineConfig& cfg,
                                         AlignMode mode) {
  return run(s, cfg, mode).features;
}

std::vector<features::FeatureMatrix> corpus_features(std::span<const session::SessionRecording> sessions,
                                                     const PipelineConfig& config, AlignMode mode) {
  std::vector<std::future<features::FeatureMatrix>> jobs;
  jobs.reserve(sessions.size());
  for (const auto& s : sessions) {
    jobs.push_back(std::async(std::launch::async, [&s, &config, mode] { return session_features(s, config, mode); }));
  }
  std::vector<features::FeatureMatrix> out;
  out.reserve(sessions.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

}  // namespace vfe::pipeline
