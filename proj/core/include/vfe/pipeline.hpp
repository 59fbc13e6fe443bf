#pragma once

#include <span>
#include <vector>

#include "vfe/alignment.hpp"
#include "vfe/artifact.hpp"
#include "vfe/config.hpp"
#include "vfe/dsp.hpp"
#include "vfe/features.hpp"
#include "vfe/session.hpp"

namespace vfe::pipeline {

enum class AlignMode {
  WithForce,  // cross-correlate envelopes against force
  Skip,       // keep the IMU timeline (deployment, no force available)
};

// Every intermediate product, for inspection and tests.
struct PipelineTrace {
  session::UniformSession uniform;
  dsp::FilterCoefficients filter;
  PerChannel<std::vector<double>> filtered;
  PerChannel<dsp::Envelope> envelopes;
  align::AlignedSession aligned;
  PerChannel<std::vector<artifact::DropoutSegment>> segments;
  align::AlignedSession repaired;
  features::FeatureMatrix features;
};

// Runs one session end to end. Errors are re-thrown with the session id.
PipelineTrace run(const session::SessionRecording& session, const PipelineConfig& config,
                  AlignMode mode = AlignMode::WithForce);

// run(...).features
features::FeatureMatrix session_features(const session::SessionRecording& session, const PipelineConfig& config,
                                         AlignMode mode = AlignMode::WithForce);

// session_features for every session, computed in parallel. The first
// failing session (in input order) is the one reported.
std::vector<features::FeatureMatrix> corpus_features(std::span<const session::SessionRecording> sessions,
                                                     const PipelineConfig& config,
                                                     AlignMode mode = AlignMode::WithForce);

}  // namespace vfe::pipeline
