#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vfe/session.hpp"

namespace vfe::sim {

// The session is split into `cycles` equal periods. Each period holds start_lb
// for hold_s, ramps linearly, holds end_lb for hold_s, and (except the last)
// releases back to start_lb over release_s.
struct RampParams {
  double start_lb = 0.0;
  double end_lb = 20.0;
  double hold_s = 0.0;
  int cycles = 1;
  double release_s = 0.2;
};

struct SineParams {
  double mean_lb = 10.0;
  double amplitude_lb = 5.0;
  double period_s = 10.0;
};

// Starts on the low plateau; each transition is a linear ramp.
struct SquareParams {
  double low_lb = 2.0;
  double high_lb = 18.0;
  double period_s = 8.0;
  double transition_s = 0.2;
};

using TrajectoryParams = std::variant<RampParams, SineParams, SquareParams>;

TrajectoryKind kind_of(const TrajectoryParams& params) noexcept;

// Force in pounds at time t; ramps clamp outside [0, duration_s], periodic
// shapes extend indefinitely.
double force_lb_at(const TrajectoryParams& params, double t, double duration_s);

// Smallest and largest force the trajectory reaches.
std::pair<double, double> force_extent_lb(const TrajectoryParams& params);

// Vibration multiplied by collapse_fraction over [start_s, start_s + duration_s),
// then ramping linearly back to full over the recovery period.
struct DropoutSpec {
  double start_s = 0.0;
  double duration_s = 0.15;
  double collapse_fraction = 5e-4;
};

inline constexpr double kDropoutRecoveryS = 0.02;

struct SimulationSpec {
  std::uint64_t seed = 0;
  std::string session_id = "sim_000";
  std::string device_model = "simulated";
  double duration_s = 40.0;
  double imu_rate_hz = 400.0;
  double force_rate_hz = 100.0;
  double carrier_hz = 136.0;
  TrajectoryParams trajectory = RampParams{};
  double force_min_lb = 0.0;
  double force_max_lb = 25.0;
  // Vibration amplitude scales by 1 / (1 + damping_k * force_lb).
  double damping_k = 0.08;
  PerChannel<double> channel_gains{0.9, 0.6, 1.4, 0.04, 0.07, 0.03};
  double noise_sd_fraction = 0.02;
  // IMU content at recorded time t reflects force at t - offset.
  double accel_clock_offset_s = 0.0;
  double gyro_clock_offset_s = 0.0;
  std::vector<DropoutSpec> dropouts;

  void validate() const;  // throws Error(InvalidSpec)
};

double damping_amplitude(double force_lb, double damping_k) noexcept;

// Fixed carrier phase per channel.
double channel_phase(Channel c) noexcept;

// Force series in newtons at force_rate_hz over [0, duration_s] inclusive.
session::ChannelSeries generate_force_trajectory(const SimulationSpec& spec);

// Deterministic for a given spec (including seed).
session::SessionRecording synthesize_session(const SimulationSpec& spec);

struct CorpusOptions {
  std::size_t n_sessions = 15;
  std::uint64_t base_seed = 7;
  std::vector<TrajectoryKind> trajectory_mix{TrajectoryKind::Ramp, TrajectoryKind::Sine, TrajectoryKind::Square};
  double duration_s = 40.0;
  double imu_rate_hz = 400.0;
  double force_rate_hz = 100.0;
  double damping_k = 0.08;
  double noise_sd_fraction = 0.02;
  double max_clock_offset_s = 0.3;
  std::size_t dropouts_per_session = 1;
  double dropout_duration_s = 0.15;
  double dropout_collapse_fraction = 5e-4;

  void validate() const;
};

// Session specs with seeded jitter, cycling through trajectory_mix.
std::vector<SimulationSpec> plan_corpus(const CorpusOptions& options);

// Writes one session directory per spec plus manifest.json; returns the specs.
std::vector<SimulationSpec> make_corpus(const CorpusOptions& options, const std::filesystem::path& out_dir);

std::string manifest_json(const CorpusOptions& options, const std::vector<SimulationSpec>& specs);
std::vector<SimulationSpec> load_manifest(const std::filesystem::path& path);

// Missing keys keep their defaults.
CorpusOptions corpus_options_from_json(std::string_view text);

}  // namespace vfe::sim
