#include "support/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "vfe/features.hpp"

namespace fixtures {

std::vector<double> tone(std::size_t n, double freq_hz, double fs, double amplitude, double phase) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase);
  }
  return x;
}

vfe::session::SessionRecording recording(double duration_s, double imu_rate_hz, double force_rate_hz,
                                         const std::function<double(std::size_t, double)>& imu,
                                         const std::function<double(double)>& force) {
  vfe::session::SessionRecording s;
  s.session_id = "fixture";
  s.device_model = "bench";
  s.trajectory_kind = vfe::TrajectoryKind::Freeform;
  s.nominal_duration_s = duration_s;
  const auto n_imu = static_cast<std::size_t>(std::floor(duration_s * imu_rate_hz + 1e-9)) + 1;
  for (std::size_t i = 0; i < n_imu; ++i) {
    const double t = static_cast<double>(i) / imu_rate_hz;
    s.imu.timestamps.push_back(t);
    for (std::size_t c = 0; c < vfe::kImuChannels; ++c) s.imu.channels[c].push_back(imu(c, t));
  }
  const auto n_force = static_cast<std::size_t>(std::floor(duration_s * force_rate_hz + 1e-9)) + 1;
  for (std::size_t i = 0; i < n_force; ++i) {
    const double t = static_cast<double>(i) / force_rate_hz;
    s.force.timestamps.push_back(t);
    s.force.values.push_back(force(t));
  }
  return s;
}

vfe::sim::SimulationSpec quiet_spec(vfe::sim::TrajectoryParams trajectory, std::uint64_t seed) {
  vfe::sim::SimulationSpec spec;
  spec.seed = seed;
  spec.trajectory = trajectory;
  spec.noise_sd_fraction = 0.0;
  return spec;
}

std::vector<double> with_collapse(std::vector<double> base, std::size_t start, std::size_t length, double fraction,
                                  std::size_t recovery) {
  for (std::size_t i = start; i < start + length && i < base.size(); ++i) base[i] *= fraction;
  for (std::size_t j = 0; j < recovery && start + length + j < base.size(); ++j) {
    const double w = static_cast<double>(j + 1) / static_cast<double>(recovery + 1);
    base[start + length + j] *= fraction + (1.0 - fraction) * w;
  }
  return base;
}

vfe::align::AlignedSession smooth_aligned(std::size_t n, double rate_hz, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  vfe::align::AlignedSession a;
  a.sample_rate_hz = rate_hz;
  a.common_length = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    a.force_n.push_back(40.0 + 30.0 * std::sin(0.7 * t));
  }
  for (std::size_t c = 0; c < vfe::kImuChannels; ++c) {
    const double gain = u(rng);
    const double wobble = u(rng);
    a.imu[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate_hz;
      a.imu[c][i] = gain / (1.0 + 0.02 * a.force_n[i]) + 0.01 * std::sin(wobble * 3.1 * t);
    }
  }
  return a;
}

vfe::session::UniformSession ideal_envelope_grid(long accel_offset, long gyro_offset) {
  const vfe::sim::TrajectoryParams traj = vfe::sim::SquareParams{2.0, 18.0, 8.0, 0.2};
  const vfe::sim::SimulationSpec spec;
  const std::size_t n = 16000;
  vfe::session::UniformSession g;
  g.sample_rate_hz = 400.0;
  auto lb_at = [&](long i) { return vfe::sim::force_lb_at(traj, static_cast<double>(i) / 400.0, 40.0); };
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i);
    g.force_n.push_back(lb_at(k) / vfe::features::kNewtonsToPounds);
    for (std::size_t c = 0; c < vfe::kImuChannels; ++c) {
      const long shift = c < 3 ? accel_offset : gyro_offset;
      g.imu[c].push_back(2.0 * spec.channel_gains[c] * (1.0 - 0.03 * lb_at(k - shift)));
    }
  }
  return g;
}

}  // namespace fixtures
