#include "vfe/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "vfe/error.hpp"
#include "vfe/features.hpp"
#include "vfe/io.hpp"

namespace vfe::sim {

using nlohmann::json;

TrajectoryKind kind_of(const TrajectoryParams& params) noexcept {
  switch (params.index()) {
    case 0: return TrajectoryKind::Ramp;
    case 1: return TrajectoryKind::Sine;
    default: return TrajectoryKind::Square;
  }
}

namespace {

struct ForceAt {
  double t;
  double duration;

  double operator()(const RampParams& p) const {
    const double tc = std::clamp(t, 0.0, duration);
    const double period = duration / p.cycles;
    const int cycle = std::min(static_cast<int>(tc / period), p.cycles - 1);
    const double phase = tc - cycle * period;
    const double release = cycle + 1 < p.cycles ? p.release_s : 0.0;
    const double ramp_s = period - 2.0 * p.hold_s - release;
    const double span = p.end_lb - p.start_lb;
    if (phase <= p.hold_s) return p.start_lb;
    if (phase < p.hold_s + ramp_s) return p.start_lb + span * (phase - p.hold_s) / ramp_s;
    if (release == 0.0 || phase < period - release) return p.end_lb;
    return p.end_lb - span * (phase - (period - release)) / release;
  }

  double operator()(const SineParams& p) const {
    return p.mean_lb + p.amplitude_lb * std::sin(2.0 * std::numbers::pi * t / p.period_s);
  }

  double operator()(const SquareParams& p) const {
    double phase = std::fmod(t, p.period_s);
    if (phase < 0.0) phase += p.period_s;
    const double half = p.period_s / 2.0;
    const double span = p.high_lb - p.low_lb;
    if (phase < half - p.transition_s) return p.low_lb;
    if (phase < half) return p.low_lb + span * (phase - (half - p.transition_s)) / p.transition_s;
    if (phase < p.period_s - p.transition_s) return p.high_lb;
    return p.high_lb - span * (phase - (p.period_s - p.transition_s)) / p.transition_s;
  }
};

double dropout_factor(const std::vector<DropoutSpec>& dropouts, double t) {
  double f = 1.0;
  for (const auto& d : dropouts) {
    const double end = d.start_s + d.duration_s;
    if (t >= d.start_s && t < end) {
      f *= d.collapse_fraction;
    } else if (t >= end && t < end + kDropoutRecoveryS) {
      f *= d.collapse_fraction + (1.0 - d.collapse_fraction) * (t - end) / kDropoutRecoveryS;
    }
  }
  return f;
}

void require(bool ok, std::string_view what) {
  if (!ok) throw Error(Errc::InvalidSpec, std::string(what));
}

}  // namespace

double force_lb_at(const TrajectoryParams& params, double t, double duration_s) {
  return std::visit(ForceAt{t, duration_s}, params);
}

std::pair<double, double> force_extent_lb(const TrajectoryParams& params) {
  struct Extent {
    std::pair<double, double> operator()(const RampParams& p) const {
      return std::minmax(p.start_lb, p.end_lb);
    }
    std::pair<double, double> operator()(const SineParams& p) const {
      const double a = std::abs(p.amplitude_lb);
      return {p.mean_lb - a, p.mean_lb + a};
    }
    std::pair<double, double> operator()(const SquareParams& p) const { return std::minmax(p.low_lb, p.high_lb); }
  };
  return std::visit(Extent{}, params);
}

double damping_amplitude(double force_lb, double damping_k) noexcept {
  return 1.0 / (1.0 + damping_k * force_lb);
}

double channel_phase(Channel c) noexcept { return 0.2 + 0.7 * static_cast<double>(index(c)); }

void SimulationSpec::validate() const {
  require(duration_s > 0.0, "duration_s must be positive");
  require(imu_rate_hz > 0.0 && force_rate_hz > 0.0, "sample rates must be positive");
  require(carrier_hz > 0.0 && carrier_hz < imu_rate_hz / 2.0, "carrier must lie below the IMU Nyquist frequency");
  require(force_min_lb >= 0.0 && force_max_lb > force_min_lb, "force range must satisfy 0 <= min < max");
  require(damping_k >= 0.0, "damping_k must be >= 0");
  require(noise_sd_fraction >= 0.0, "noise_sd_fraction must be >= 0");
  for (double g : channel_gains) require(g > 0.0, "channel gains must be positive");

  if (const auto* r = std::get_if<RampParams>(&trajectory)) {
    require(r->cycles >= 1, "ramp cycles must be >= 1");
    require(r->hold_s >= 0.0 && r->release_s > 0.0, "ramp hold must be >= 0 and release > 0");
    require(duration_s / r->cycles - 2.0 * r->hold_s - (r->cycles > 1 ? r->release_s : 0.0) > 0.0,
            "ramp holds and release must leave time for the ramp");
  } else if (const auto* s = std::get_if<SineParams>(&trajectory)) {
    require(s->period_s > 0.0, "sine period must be positive");
  } else if (const auto* q = std::get_if<SquareParams>(&trajectory)) {
    require(q->transition_s > 0.0 && q->period_s > 2.0 * q->transition_s,
            "square period must exceed two transitions");
  }
  const auto [lo, hi] = force_extent_lb(trajectory);
  require(lo >= force_min_lb - 1e-12 && hi <= force_max_lb + 1e-12,
          fmt::format("trajectory spans [{}, {}] lb, outside the force range [{}, {}]", lo, hi, force_min_lb,
                      force_max_lb));
  for (const auto& d : dropouts) {
    require(d.collapse_fraction > 0.0 && d.collapse_fraction < 1.0, "collapse_fraction must lie in (0, 1)");
    require(d.duration_s > 0.0, "dropout duration must be positive");
  }
}

session::ChannelSeries generate_force_trajectory(const SimulationSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::floor(spec.duration_s * spec.force_rate_hz + 1e-9)) + 1;
  session::ChannelSeries out;
  out.timestamps.resize(n);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.force_rate_hz;
    out.timestamps[i] = t;
    out.values[i] = force_lb_at(spec.trajectory, t, spec.duration_s) / features::kNewtonsToPounds;
  }
  return out;
}

session::SessionRecording synthesize_session(const SimulationSpec& spec) {
  spec.validate();
  session::SessionRecording s;
  s.session_id = spec.session_id;
  s.device_model = spec.device_model;
  s.trajectory_kind = kind_of(spec.trajectory);
  s.nominal_duration_s = spec.duration_s;
  s.force = generate_force_trajectory(spec);

  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.imu_rate_hz));
  s.imu.timestamps.resize(n);
  for (auto& ch : s.imu.channels) ch.resize(n);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double w = 2.0 * std::numbers::pi * spec.carrier_hz;
  PerChannel<double> phase{};
  for (std::size_t c = 0; c < kImuChannels; ++c) phase[c] = channel_phase(static_cast<Channel>(c));

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.imu_rate_hz;
    s.imu.timestamps[i] = t;
    const double drop = dropout_factor(spec.dropouts, t);
    const double amp_accel =
        damping_amplitude(force_lb_at(spec.trajectory, t - spec.accel_clock_offset_s, spec.duration_s), spec.damping_k);
    const double amp_gyro =
        damping_amplitude(force_lb_at(spec.trajectory, t - spec.gyro_clock_offset_s, spec.duration_s), spec.damping_k);
    for (std::size_t c = 0; c < kImuChannels; ++c) {
      const double gain = spec.channel_gains[c];
      const double amp = c < 3 ? amp_accel : amp_gyro;
      const double noise = spec.noise_sd_fraction > 0.0 ? spec.noise_sd_fraction * gain * gauss(rng) : 0.0;
      s.imu.channels[c][i] = gain * amp * drop * std::sin(w * t + phase[c]) + noise;
    }
  }
  session::validate(s);
  return s;
}

void CorpusOptions::validate() const {
  require(n_sessions >= 1, "n_sessions must be >= 1");
  require(!trajectory_mix.empty(), "trajectory_mix must not be empty");
  for (auto k : trajectory_mix) require(k != TrajectoryKind::Freeform, "the simulator cannot plan freeform sessions");
  require(duration_s >= 20.0, "corpus sessions must last at least 20 s");
  require(max_clock_offset_s >= 0.0, "max_clock_offset_s must be >= 0");
  require(dropout_duration_s > 0.0, "dropout_duration_s must be positive");
  require(dropout_collapse_fraction > 0.0 && dropout_collapse_fraction < 1.0,
          "dropout_collapse_fraction must lie in (0, 1)");
}

std::vector<SimulationSpec> plan_corpus(const CorpusOptions& o) {
  o.validate();
  std::mt19937_64 rng(o.base_seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  std::vector<SimulationSpec> specs;
  specs.reserve(o.n_sessions);
  for (std::size_t i = 0; i < o.n_sessions; ++i) {
    SimulationSpec s;
    s.seed = rng();
    s.session_id = fmt::format("sim_{:03d}", i);
    s.duration_s = o.duration_s;
    s.imu_rate_hz = o.imu_rate_hz;
    s.force_rate_hz = o.force_rate_hz;
    s.damping_k = o.damping_k;
    s.noise_sd_fraction = o.noise_sd_fraction;

    switch (o.trajectory_mix[i % o.trajectory_mix.size()]) {
      case TrajectoryKind::Ramp:
        s.trajectory = RampParams{uniform(0.0, 3.0), uniform(18.0, 24.0), uniform(1.5, 3.0),
                                  uniform(0.0, 1.0) < 0.5 ? 2 : 3, 0.2};
        break;
      case TrajectoryKind::Sine:
        s.trajectory = SineParams{uniform(10.0, 13.0), uniform(6.0, 9.0), uniform(6.0, 12.0)};
        break;
      default:
        s.trajectory = SquareParams{uniform(1.0, 4.0), uniform(15.0, 23.0), uniform(6.0, 10.0), 0.2};
        break;
    }

    s.accel_clock_offset_s = uniform(-o.max_clock_offset_s, o.max_clock_offset_s);
    s.gyro_clock_offset_s = uniform(-o.max_clock_offset_s, o.max_clock_offset_s);
    for (std::size_t d = 0; d < o.dropouts_per_session; ++d) {
      s.dropouts.push_back({uniform(5.0, o.duration_s - 5.0), o.dropout_duration_s, o.dropout_collapse_fraction});
    }
    s.validate();
    specs.push_back(std::move(s));
  }
  return specs;
}

namespace {

json trajectory_to_json(const TrajectoryParams& p) {
  struct ToJson {
    json operator()(const RampParams& r) const {
      return {{"kind", "ramp"},        {"start_lb", r.start_lb}, {"end_lb", r.end_lb},
              {"hold_s", r.hold_s},    {"cycles", r.cycles},     {"release_s", r.release_s}};
    }
    json operator()(const SineParams& s) const {
      return {{"kind", "sine"}, {"mean_lb", s.mean_lb}, {"amplitude_lb", s.amplitude_lb}, {"period_s", s.period_s}};
    }
    json operator()(const SquareParams& q) const {
      return {{"kind", "square"},
              {"low_lb", q.low_lb},
              {"high_lb", q.high_lb},
              {"period_s", q.period_s},
              {"transition_s", q.transition_s}};
    }
  };
  return std::visit(ToJson{}, p);
}

TrajectoryParams trajectory_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "ramp") {
    return RampParams{j.at("start_lb").get<double>(), j.at("end_lb").get<double>(), j.at("hold_s").get<double>(),
                      j.at("cycles").get<int>(), j.at("release_s").get<double>()};
  }
  if (kind == "sine") {
    return SineParams{j.at("mean_lb").get<double>(), j.at("amplitude_lb").get<double>(),
                      j.at("period_s").get<double>()};
  }
  if (kind == "square") {
    return SquareParams{j.at("low_lb").get<double>(), j.at("high_lb").get<double>(), j.at("period_s").get<double>(),
                        j.at("transition_s").get<double>()};
  }
  throw Error(Errc::InvalidSpec, fmt::format("unknown trajectory kind '{}'", kind));
}

json spec_to_json(const SimulationSpec& s) {
  json drops = json::array();
  for (const auto& d : s.dropouts) {
    drops.push_back({{"start_s", d.start_s}, {"duration_s", d.duration_s}, {"collapse_fraction", d.collapse_fraction}});
  }
  return {{"seed", s.seed},
          {"session_id", s.session_id},
          {"device_model", s.device_model},
          {"duration_s", s.duration_s},
          {"imu_rate_hz", s.imu_rate_hz},
          {"force_rate_hz", s.force_rate_hz},
          {"carrier_hz", s.carrier_hz},
          {"trajectory", trajectory_to_json(s.trajectory)},
          {"force_range_lb", {s.force_min_lb, s.force_max_lb}},
          {"damping_k", s.damping_k},
          {"channel_gains", s.channel_gains},
          {"noise_sd_fraction", s.noise_sd_fraction},
          {"accel_clock_offset_s", s.accel_clock_offset_s},
          {"gyro_clock_offset_s", s.gyro_clock_offset_s},
          {"dropouts", std::move(drops)}};
}

SimulationSpec spec_from_json(const json& j) {
  SimulationSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.session_id = j.at("session_id").get<std::string>();
  s.device_model = j.at("device_model").get<std::string>();
  s.duration_s = j.at("duration_s").get<double>();
  s.imu_rate_hz = j.at("imu_rate_hz").get<double>();
  s.force_rate_hz = j.at("force_rate_hz").get<double>();
  s.carrier_hz = j.at("carrier_hz").get<double>();
  s.trajectory = trajectory_from_json(j.at("trajectory"));
  const auto range = j.at("force_range_lb").get<std::vector<double>>();
  if (range.size() != 2) throw Error(Errc::InvalidSpec, "force_range_lb must have two entries");
  s.force_min_lb = range[0];
  s.force_max_lb = range[1];
  s.damping_k = j.at("damping_k").get<double>();
  s.channel_gains = j.at("channel_gains").get<PerChannel<double>>();
  s.noise_sd_fraction = j.at("noise_sd_fraction").get<double>();
  s.accel_clock_offset_s = j.at("accel_clock_offset_s").get<double>();
  s.gyro_clock_offset_s = j.at("gyro_clock_offset_s").get<double>();
  for (const auto& d : j.at("dropouts")) {
    s.dropouts.push_back({d.at("start_s").get<double>(), d.at("duration_s").get<double>(),
                          d.at("collapse_fraction").get<double>()});
  }
  return s;
}

json options_to_json(const CorpusOptions& o) {
  json mix = json::array();
  for (auto k : o.trajectory_mix) mix.push_back(std::string(to_string(k)));
  return {{"n_sessions", o.n_sessions},
          {"base_seed", o.base_seed},
          {"trajectory_mix", std::move(mix)},
          {"duration_s", o.duration_s},
          {"imu_rate_hz", o.imu_rate_hz},
          {"force_rate_hz", o.force_rate_hz},
          {"damping_k", o.damping_k},
          {"noise_sd_fraction", o.noise_sd_fraction},
          {"max_clock_offset_s", o.max_clock_offset_s},
          {"dropouts_per_session", o.dropouts_per_session},
          {"dropout_duration_s", o.dropout_duration_s},
          {"dropout_collapse_fraction", o.dropout_collapse_fraction}};
}

}  // namespace

std::string manifest_json(const CorpusOptions& options, const std::vector<SimulationSpec>& specs) {
  json sessions = json::array();
  for (const auto& s : specs) sessions.push_back(spec_to_json(s));
  const json j = {{"schema_version", 1}, {"options", options_to_json(options)}, {"sessions", std::move(sessions)}};
  return j.dump(2) + "\n";
}

std::vector<SimulationSpec> make_corpus(const CorpusOptions& options, const std::filesystem::path& out_dir) {
  auto specs = plan_corpus(options);
  for (const auto& spec : specs) {
    session::save_session(synthesize_session(spec), out_dir / spec.session_id);
  }
  io::write_file_atomic(out_dir / "manifest.json", manifest_json(options, specs));
  return specs;
}

std::vector<SimulationSpec> load_manifest(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  try {
    const json j = json::parse(text);
    std::vector<SimulationSpec> specs;
    for (const auto& s : j.at("sessions")) specs.push_back(spec_from_json(s));
    return specs;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, fmt::format("manifest {}: {}", path.string(), e.what()));
  }
}

CorpusOptions corpus_options_from_json(std::string_view text) {
  CorpusOptions o;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(Errc::InvalidSpec, "simulation config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "n_sessions") o.n_sessions = value.get<std::size_t>();
      else if (key == "base_seed") o.base_seed = value.get<std::uint64_t>();
      else if (key == "trajectory_mix") {
        o.trajectory_mix.clear();
        for (const auto& k : value) {
          const auto kind = trajectory_from_string(k.get<std::string>());
          if (!kind) throw Error(Errc::InvalidSpec, fmt::format("unknown trajectory kind {}", k.dump()));
          o.trajectory_mix.push_back(*kind);
        }
      } else if (key == "duration_s") o.duration_s = value.get<double>();
      else if (key == "imu_rate_hz") o.imu_rate_hz = value.get<double>();
      else if (key == "force_rate_hz") o.force_rate_hz = value.get<double>();
      else if (key == "damping_k") o.damping_k = value.get<double>();
      else if (key == "noise_sd_fraction") o.noise_sd_fraction = value.get<double>();
      else if (key == "max_clock_offset_s") o.max_clock_offset_s = value.get<double>();
      else if (key == "dropouts_per_session") o.dropouts_per_session = value.get<std::size_t>();
      else if (key == "dropout_duration_s") o.dropout_duration_s = value.get<double>();
      else if (key == "dropout_collapse_fraction") o.dropout_collapse_fraction = value.get<double>();
      else throw Error(Errc::InvalidSpec, fmt::format("unknown simulation config key '{}'", key));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidSpec, fmt::format("simulation config: {}", e.what()));
  }
  o.validate();
  return o;
}

}  // namespace vfe::sim
