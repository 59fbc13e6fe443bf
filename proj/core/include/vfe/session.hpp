#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vfe {

inline constexpr std::size_t kImuChannels = 6;

enum class Channel : std::size_t { AccelX = 0, AccelY, AccelZ, GyroX, GyroY, GyroZ };

inline constexpr std::array<std::string_view, kImuChannels> kChannelNames{
    "accel_x", "accel_y", "accel_z", "gyro_x", "gyro_y", "gyro_z"};

constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }
constexpr std::string_view name(Channel c) noexcept { return kChannelNames[index(c)]; }
std::optional<Channel> channel_from_name(std::string_view name) noexcept;

// One value per IMU channel, indexed by Channel.
template <typename T>
using PerChannel = std::array<T, kImuChannels>;

enum class TrajectoryKind { Ramp, Sine, Square, Freeform };

std::string_view to_string(TrajectoryKind kind) noexcept;
std::optional<TrajectoryKind> trajectory_from_string(std::string_view s) noexcept;

}  // namespace vfe

namespace vfe::session {

inline constexpr int kSchemaVersion = 1;

// Timestamps in seconds from session start; values in sensor units
// (m/s^2, rad/s, or newtons).
struct ChannelSeries {
  std::vector<double> timestamps;
  std::vector<double> values;

  std::size_t size() const noexcept { return timestamps.size(); }
};

// The six IMU channels share one clock.
struct ImuSeries {
  std::vector<double> timestamps;
  PerChannel<std::vector<double>> channels;

  std::size_t size() const noexcept { return timestamps.size(); }
  ChannelSeries series(Channel c) const { return {timestamps, channels[index(c)]}; }
};

struct SessionRecording {
  std::string session_id;
  std::string device_model;
  TrajectoryKind trajectory_kind = TrajectoryKind::Freeform;
  double nominal_duration_s = 0.0;
  ImuSeries imu;
  // Empty when loaded without force (deployment-style prediction).
  ChannelSeries force;

  bool has_force() const noexcept { return force.size() > 0; }
  double imu_span_s() const noexcept;
};

// Throws Error on the first violated invariant.
void validate(const SessionRecording& session);

struct LoadOptions {
  bool read_force = true;
};

// Reads meta.json, imu.csv and (optionally) force.csv from a session directory.
SessionRecording load_session(const std::filesystem::path& dir, LoadOptions options = {});

// Writes the bundle with 9 significant digits per value.
void save_session(const SessionRecording& session, const std::filesystem::path& dir);

// Session directories (those holding meta.json) directly under corpus_dir,
// sorted by path.
std::vector<std::filesystem::path> discover_sessions(const std::filesystem::path& corpus_dir);

// IMU, force and the grid they share after resampling.
struct UniformSession {
  double sample_rate_hz = 0.0;
  double start_s = 0.0;
  PerChannel<std::vector<double>> imu;
  std::vector<double> force_n;  // empty when the recording has no force

  std::size_t size() const noexcept { return imu[0].size(); }
  double time_at(std::size_t i) const noexcept {
    return start_s + static_cast<double>(i) / sample_rate_hz;
  }
};

// Lowest rate that keeps the default 136 +/- 5 Hz band below Nyquist.
inline constexpr double kMinResampleRateHz = 292.0;

// Mean IMU rate, snapped to the nearest integer Hz when within 1 ppm of it.
double native_imu_rate(const SessionRecording& session);

// Linear interpolation of every series onto start + i / rate over the
// IMU/force overlap; length floor(overlap * rate) + 1.
UniformSession resample_to_uniform(const SessionRecording& session, double target_rate_hz,
                                   double min_rate_hz = kMinResampleRateHz);

}  // namespace vfe::session
