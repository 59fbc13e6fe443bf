#include "vfe/session.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "vfe/error.hpp"
#include "vfe/io.hpp"

namespace vfe {

std::optional<Channel> channel_from_name(std::string_view n) noexcept {
  for (std::size_t i = 0; i < kImuChannels; ++i) {
    if (kChannelNames[i] == n) return static_cast<Channel>(i);
  }
  return std::nullopt;
}

std::string_view to_string(TrajectoryKind kind) noexcept {
  switch (kind) {
    case TrajectoryKind::Ramp: return "ramp";
    case TrajectoryKind::Sine: return "sine";
    case TrajectoryKind::Square: return "square";
    case TrajectoryKind::Freeform: return "freeform";
  }
  return "freeform";
}

std::optional<TrajectoryKind> trajectory_from_string(std::string_view s) noexcept {
  if (s == "ramp") return TrajectoryKind::Ramp;
  if (s == "sine") return TrajectoryKind::Sine;
  if (s == "square") return TrajectoryKind::Square;
  if (s == "freeform") return TrajectoryKind::Freeform;
  return std::nullopt;
}

}  // namespace vfe

namespace vfe::session {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kImuHeader = "t,accel_x,accel_y,accel_z,gyro_x,gyro_y,gyro_z";
constexpr std::string_view kForceHeader = "t,force_n";

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Parses a numeric CSV with an exact header into columns. Row numbers in
// errors are 1-based file line numbers (the header is line 1).
std::vector<std::vector<double>> read_csv(const fs::path& path, std::string_view header) {
  const std::string text = io::read_file(path);
  const std::string file = path.filename().string();
  const std::size_t ncols = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  std::vector<std::vector<double>> cols(ncols);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line = trim_cr(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!saw_header) {
      if (line != header) {
        throw Error(Errc::SchemaViolation,
                    fmt::format("{} row {}: expected header '{}', got '{}'", file, line_no, header, line));
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field =
          line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (col >= ncols) {
        throw Error(Errc::SchemaViolation,
                    fmt::format("{} row {}: more than {} columns", file, line_no, ncols));
      }
      double value = 0.0;
      const auto* first = field.data();
      const auto* last = field.data() + field.size();
      if (!field.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (field.empty() || ec == std::errc::invalid_argument || ptr != last) {
        throw Error(Errc::SchemaViolation,
                    fmt::format("{} row {}: column {} is not a number: '{}'", file, line_no, col + 1, field));
      }
      if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
        throw Error(Errc::NonFiniteValue,
                    fmt::format("{} row {}: column {} is not finite: '{}'", file, line_no, col + 1, field));
      }
      cols[col].push_back(value);
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != ncols) {
      throw Error(Errc::SchemaViolation,
                  fmt::format("{} row {}: expected {} columns, got {}", file, line_no, ncols, col));
    }
  }
  if (!saw_header) {
    throw Error(Errc::SchemaViolation, fmt::format("{}: empty file, missing header", file));
  }
  return cols;
}

void check_series(const ChannelSeries& s, std::string_view what) {
  if (s.timestamps.size() != s.values.size()) {
    throw Error(Errc::SchemaViolation, fmt::format("{}: {} timestamps but {} values", what,
                                                   s.timestamps.size(), s.values.size()));
  }
  if (s.size() < 2) {
    throw Error(Errc::SchemaViolation, fmt::format("{}: needs at least 2 samples", what));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    // +2: header line plus 1-based rows.
    if (!std::isfinite(s.timestamps[i]) || !std::isfinite(s.values[i])) {
      throw Error(Errc::NonFiniteValue, fmt::format("{} row {}: non-finite value", what, i + 2));
    }
    if (i > 0 && !(s.timestamps[i] > s.timestamps[i - 1])) {
      throw Error(Errc::NonMonotonicTimestamps,
                  fmt::format("{} row {}: timestamp {} does not increase", what, i + 2, s.timestamps[i]));
    }
  }
}

}  // namespace

double SessionRecording::imu_span_s() const noexcept {
  if (imu.size() < 2) return 0.0;
  return imu.timestamps.back() - imu.timestamps.front();
}

void validate(const SessionRecording& s) {
  for (std::size_t c = 0; c < kImuChannels; ++c) {
    if (s.imu.channels[c].size() != s.imu.size()) {
      throw Error(Errc::SchemaViolation,
                  fmt::format("imu.csv: channel {} has {} samples, expected {}", kChannelNames[c],
                              s.imu.channels[c].size(), s.imu.size()));
    }
    check_series({s.imu.timestamps, s.imu.channels[c]}, "imu.csv");
  }
  if (s.has_force()) check_series(s.force, "force.csv");

  const double span = s.imu_span_s();
  if (!(s.nominal_duration_s > 0.0) || std::abs(span - s.nominal_duration_s) > 0.25 * s.nominal_duration_s) {
    throw Error(Errc::SchemaViolation,
                fmt::format("meta.json: nominal_duration_s {} is not within 25% of the IMU span {} s",
                            s.nominal_duration_s, span));
  }
}

SessionRecording load_session(const fs::path& dir, LoadOptions options) {
  SessionRecording s;

  const fs::path meta_path = dir / "meta.json";
  const std::string meta_text = io::read_file(meta_path);
  json meta;
  try {
    meta = json::parse(meta_text);
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, fmt::format("meta.json: {}", e.what()));
  }
  try {
    if (meta.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(Errc::SchemaViolation,
                  fmt::format("meta.json: unsupported schema_version {}", meta.at("schema_version").dump()));
    }
    s.session_id = meta.at("session_id").get<std::string>();
    s.device_model = meta.at("device_model").get<std::string>();
    const auto kind = trajectory_from_string(meta.at("trajectory_kind").get<std::string>());
    if (!kind) throw Error(Errc::SchemaViolation, "meta.json: unknown trajectory_kind");
    s.trajectory_kind = *kind;
    s.nominal_duration_s = meta.at("nominal_duration_s").get<double>();
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, fmt::format("meta.json: {}", e.what()));
  }

  auto imu = read_csv(dir / "imu.csv", kImuHeader);
  s.imu.timestamps = std::move(imu[0]);
  for (std::size_t c = 0; c < kImuChannels; ++c) s.imu.channels[c] = std::move(imu[c + 1]);

  if (options.read_force) {
    auto force = read_csv(dir / "force.csv", kForceHeader);
    s.force.timestamps = std::move(force[0]);
    s.force.values = std::move(force[1]);
    if (s.force.size() == 0) throw Error(Errc::SchemaViolation, "force.csv: no samples");
  }

  validate(s);
  return s;
}

void save_session(const SessionRecording& s, const fs::path& dir) {
  const json meta = {
      {"session_id", s.session_id},
      {"device_model", s.device_model},
      {"trajectory_kind", std::string(to_string(s.trajectory_kind))},
      {"nominal_duration_s", s.nominal_duration_s},
      {"schema_version", kSchemaVersion},
  };

  std::string imu;
  imu.reserve(s.imu.size() * 96);
  imu += kImuHeader;
  imu += '\n';
  for (std::size_t i = 0; i < s.imu.size(); ++i) {
    imu += io::format_g9(s.imu.timestamps[i]);
    for (const auto& ch : s.imu.channels) {
      imu += ',';
      imu += io::format_g9(ch[i]);
    }
    imu += '\n';
  }

  std::string force;
  force += kForceHeader;
  force += '\n';
  for (std::size_t i = 0; i < s.force.size(); ++i) {
    force += io::format_g9(s.force.timestamps[i]);
    force += ',';
    force += io::format_g9(s.force.values[i]);
    force += '\n';
  }

  io::write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  io::write_file_atomic(dir / "imu.csv", imu);
  io::write_file_atomic(dir / "force.csv", force);
}

std::vector<fs::path> discover_sessions(const fs::path& corpus_dir) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) {
    throw Error(Errc::MissingFile, fmt::format("corpus directory {} not found", corpus_dir.string()));
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "meta.json")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double native_imu_rate(const SessionRecording& s) {
  const double span = s.imu_span_s();
  if (!(span > 0.0)) throw Error(Errc::SchemaViolation, "IMU span is empty");
  const double rate = static_cast<double>(s.imu.size() - 1) / span;
  const double nearest = std::round(rate);
  return std::abs(rate - nearest) <= 1e-6 * rate ? nearest : rate;
}

namespace {

// Evaluates the piecewise-linear series at increasing query points. A query
// that lands exactly on a sample returns that sample unchanged.
class Interpolator {
 public:
  Interpolator(const std::vector<double>& t, const std::vector<double>& v) : t_(t), v_(v) {}

  double operator()(double x) {
    while (j_ + 2 < t_.size() && t_[j_ + 1] <= x) ++j_;
    if (x == t_[j_]) return v_[j_];
    if (x >= t_[j_ + 1]) return v_[j_ + 1];
    const double frac = (x - t_[j_]) / (t_[j_ + 1] - t_[j_]);
    return v_[j_] + (v_[j_ + 1] - v_[j_]) * frac;
  }

 private:
  const std::vector<double>& t_;
  const std::vector<double>& v_;
  std::size_t j_ = 0;
};

}  // namespace

UniformSession resample_to_uniform(const SessionRecording& s, double target_rate_hz, double min_rate_hz) {
  if (!(target_rate_hz >= min_rate_hz)) {
    throw Error(Errc::RateTooLow,
                fmt::format("target rate {} Hz is below the {} Hz minimum", target_rate_hz, min_rate_hz));
  }
  double start = s.imu.timestamps.front();
  double end = s.imu.timestamps.back();
  if (s.has_force()) {
    start = std::max(start, s.force.timestamps.front());
    end = std::min(end, s.force.timestamps.back());
    if (!(end > start)) {
      throw Error(Errc::NoTemporalOverlap,
                  fmt::format("session {}: IMU and force time ranges do not overlap", s.session_id));
    }
  }

  // The epsilon keeps an exact multiple of the sample period from losing
  // its last grid point to rounding.
  const auto n = static_cast<std::size_t>(std::floor((end - start) * target_rate_hz + 1e-9)) + 1;

  UniformSession u;
  u.sample_rate_hz = target_rate_hz;
  u.start_s = start;

  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = std::min(u.time_at(i), end);

  for (std::size_t c = 0; c < kImuChannels; ++c) {
    Interpolator interp(s.imu.timestamps, s.imu.channels[c]);
    auto& out = u.imu[c];
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = interp(grid[i]);
  }
  if (s.has_force()) {
    Interpolator interp(s.force.timestamps, s.force.values);
    u.force_n.resize(n);
    for (std::size_t i = 0; i < n; ++i) u.force_n[i] = interp(grid[i]);
  }
  return u;
}

}  // namespace vfe::session
