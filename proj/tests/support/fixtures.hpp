#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "vfe/alignment.hpp"
#include "vfe/session.hpp"
#include "vfe/simulator.hpp"

namespace fixtures {

// amplitude * sin(2 pi f i / fs + phase)
std::vector<double> tone(std::size_t n, double freq_hz, double fs, double amplitude = 1.0, double phase = 0.0);

// Recording on a shared uniform clock: IMU channel c is imu(c, t), force is
// force(t) sampled at force_rate_hz.
vfe::session::SessionRecording recording(double duration_s, double imu_rate_hz, double force_rate_hz,
                                         const std::function<double(std::size_t, double)>& imu,
                                         const std::function<double(double)>& force);

// Simulator spec with no noise and no dropouts.
vfe::sim::SimulationSpec quiet_spec(vfe::sim::TrajectoryParams trajectory, std::uint64_t seed = 1);

// base[i] multiplied by `fraction` over [start, start + length) followed by a
// linear recovery over `recovery` samples.
std::vector<double> with_collapse(std::vector<double> base, std::size_t start, std::size_t length, double fraction,
                                  std::size_t recovery);

// Aligned session of n samples with smooth positive envelopes and force.
vfe::align::AlignedSession smooth_aligned(std::size_t n, double rate_hz, unsigned seed);

// Envelopes exactly linear in delayed force, 2 * gain * (1 - 0.03 F(t - offset)),
// for the default 2 -> 18 lb square trajectory on a 40 s, 400 Hz grid, with
// integer sample offsets per sensor group. Pearson correlation reaches 1 only
// at the true lag, so recovery must be exact.
vfe::session::UniformSession ideal_envelope_grid(long accel_offset, long gyro_offset);

}  // namespace fixtures
