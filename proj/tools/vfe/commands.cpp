#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <vector>

#include <fmt/format.h>

#include "vfe/alignment.hpp"
#include "vfe/config.hpp"
#include "vfe/error.hpp"
#include "vfe/evaluation.hpp"
#include "vfe/features.hpp"
#include "vfe/io.hpp"
#include "vfe/model.hpp"
#include "vfe/pipeline.hpp"
#include "vfe/session.hpp"
#include "vfe/simulator.hpp"

namespace vfe::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidSpec:
      return kExitUsage;
    case Errc::MissingFile:
    case Errc::IoError:
      return kExitIo;
    case Errc::SchemaMismatch:
    case Errc::SchemaVersionMismatch:
    case Errc::CorruptFile:
      return kExitModelSchema;
    default:
      return kExitPipeline;
  }
}

int report(const Error& e, int code) {
  fmt::print(stderr, "vfe: {}\n", e.what());
  return code;
}

int report(const Error& e) { return report(e, exit_code_for(e.code())); }

// Thrown for failures inside a corpus session, which always exit 4.
struct SessionFailure {
  Error error;
};

PipelineConfig resolve_config(const ConfigFlags& flags) {
  PipelineConfig cfg = flags.config_path ? load_config(*flags.config_path) : PipelineConfig{};
  if (flags.kind) {
    const auto kind = model_kind_from_string(*flags.kind);
    if (!kind) throw Error(Errc::InvalidSpec, fmt::format("unknown model kind '{}'", *flags.kind));
    cfg.kind = *kind;
  }
  if (flags.lambda) cfg.lambda = *flags.lambda;
  cfg.validate();
  return cfg;
}

std::vector<session::SessionRecording> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::MissingFile, fmt::format("corpus directory {} not found", dir.string()));
  const auto dirs = session::discover_sessions(dir);
  if (dirs.empty()) throw Error(Errc::MissingFile, fmt::format("no sessions under {}", dir.string()));
  std::vector<session::SessionRecording> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) {
    try {
      out.push_back(session::load_session(d));
    } catch (const Error& e) {
      throw SessionFailure{e.with_context(fmt::format("session {}", d.filename().string()))};
    }
  }
  return out;
}

std::vector<features::FeatureMatrix> corpus_features(const std::vector<session::SessionRecording>& corpus,
                                                     const PipelineConfig& cfg) {
  try {
    return pipeline::corpus_features(corpus, cfg);
  } catch (const Error& e) {
    throw SessionFailure{e};
  }
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const SessionFailure& f) {
    return report(f.error, kExitPipeline);
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "vfe: {}\n", e.what());
    return kExitIo;
  }
}

std::string series_csv(std::string_view header, const std::vector<double>& t, const std::vector<double>& v) {
  std::string out = fmt::format("t,{}\n", header);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += io::format_g9(t[i]);
    out += ',';
    out += io::format_g9(v[i]);
    out += '\n';
  }
  return out;
}

std::vector<double> grid_times(double start_s, double rate, std::size_t n, std::size_t offset = 0) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = start_s + static_cast<double>(i + offset) / rate;
  return t;
}

std::string matrix_csv(const features::FeatureMatrix& m, std::string_view target_name) {
  std::string out;
  for (const auto& c : m.column_names) out += c + ',';
  out += target_name;
  out += '\n';
  for (std::size_t r = 0; r < m.n_samples; ++r) {
    for (std::size_t c = 0; c < m.column_names.size(); ++c) {
      out += io::format_g9(m.at(r, c));
      out += ',';
    }
    if (m.has_target()) out += io::format_g9(m.target[r]);
    out += '\n';
  }
  return out;
}

std::string_view target_column(ModelKind kind) { return kind == ModelKind::Absolute ? "force_lb" : "force_pct"; }

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
  return guarded([&] {
    sim::CorpusOptions options =
        args.config_path ? sim::corpus_options_from_json(io::read_file(*args.config_path)) : sim::CorpusOptions{};
    if (args.n_sessions) options.n_sessions = *args.n_sessions;
    if (args.seed) options.base_seed = *args.seed;
    options.validate();
    const auto specs = sim::make_corpus(options, args.out_dir);

    std::map<std::string_view, int> by_kind;
    for (const auto& s : specs) ++by_kind[to_string(sim::kind_of(s.trajectory))];
    std::string mix;
    for (const auto& [k, n] : by_kind) mix += fmt::format("{}{} {}", mix.empty() ? "" : ", ", n, k);
    fmt::print("wrote {} sessions ({}) to {}\n", specs.size(), mix, args.out_dir.string());
    fmt::print("seed {}, {:.0f} s at {:.0f} Hz IMU / {:.0f} Hz force, manifest {}\n", options.base_seed,
               options.duration_s, options.imu_rate_hz, options.force_rate_hz,
               (args.out_dir / "manifest.json").string());
    return kExitOk;
  });
}

int cmd_profile(const ProfileArgs& args) {
  return guarded([&] {
    const PipelineConfig cfg = resolve_config(args.config);
    const auto corpus = load_corpus(args.corpus_dir);
    const auto per_session = corpus_features(corpus, cfg);
    const auto all = features::concatenate(per_session);
    model::ForceModel m = model::ridge_fit(all, cfg.lambda);
    m.pipeline_config_hash = config_hash(cfg);
    model::save_model(m, args.model_out);
    fmt::print("trained {} model on {} sessions ({} samples), lambda {}\n", to_string(cfg.kind), corpus.size(),
               all.n_samples, cfg.lambda);
    fmt::print("wrote {}\n", args.model_out.string());
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args) {
  return guarded([&] {
    const PipelineConfig cfg = resolve_config(args.config);
    const auto corpus = load_corpus(args.corpus_dir);
    const auto per_session = corpus_features(corpus, cfg);
    eval::EvaluationReport r = eval::hold_one_out(per_session, cfg.lambda, cfg.outlier_sd_multiplier);
    r.pipeline_config_hash = config_hash(cfg);

    const std::string kind(to_string(cfg.kind));
    const fs::path json_path = args.out_dir / fmt::format("evaluation_{}.json", kind);
    const fs::path csv_path = args.out_dir / fmt::format("evaluation_{}.csv", kind);
    io::write_file_atomic(json_path, eval::report_to_json(r, cfg));
    io::write_file_atomic(csv_path, eval::report_to_csv(r));
    if (args.traces) {
      for (std::size_t i = 0; i < r.traces.size(); ++i) {
        const auto name = fmt::format("trace_{}_fold{:02d}_{}.csv", kind, i, r.traces[i].session_id);
        io::write_file_atomic(args.out_dir / "traces" / name, eval::trace_to_csv(r.traces[i]));
      }
    }

    const std::string_view unit = cfg.kind == ModelKind::Absolute ? " lb" : "%";
    double min_r2 = r.folds.front().r2;
    for (const auto& f : r.folds) min_r2 = std::min(min_r2, f.r2);
    fmt::print("{} model, {} folds, {} samples\n", kind, r.folds.size(), r.total_samples);
    fmt::print("mean MAE {:.1f}{} (sd {:.1f}), mean RMSE {:.1f}{}, min fold R^2 {:.3f}\n", r.mae.mean, unit, r.mae.sd,
               r.rmse.mean, unit, min_r2);
    if (r.outlier_sessions.empty()) {
      fmt::print("outlier sessions: none\n");
    } else {
      std::string list;
      for (const auto& s : r.outlier_sessions) list += (list.empty() ? "" : ", ") + s;
      fmt::print("outlier sessions: {}\n", list);
    }
    fmt::print("wrote {} and {}\n", json_path.string(), csv_path.string());
    return kExitOk;
  });
}

int cmd_predict(const PredictArgs& args) {
  return guarded([&] {
    const model::ForceModel m = model::load_model(args.model_path);
    PipelineConfig cfg = args.config_path ? load_config(args.config_path->string()) : PipelineConfig{};
    cfg.kind = m.kind;
    cfg.lambda = m.lambda;
    cfg.validate();
    if (!m.pipeline_config_hash.empty() && m.pipeline_config_hash != config_hash(cfg)) {
      fmt::print(stderr, "vfe: warning: pipeline configuration differs from the one the model was trained with\n");
    }

    const auto s = session::load_session(args.session_dir, {.read_force = args.align_with_force});
    const auto mode = args.align_with_force ? pipeline::AlignMode::WithForce : pipeline::AlignMode::Skip;
    auto x = pipeline::session_features(s, cfg, mode);
    const auto y = model::predict(m, x);

    std::string out = fmt::format("t,{}\n", target_column(m.kind));
    for (std::size_t i = 0; i < y.size(); ++i) {
      out += io::format_g9(x.time_s[i]);
      out += ',';
      out += io::format_g9(y[i]);
      out += '\n';
    }
    io::write_file_atomic(args.out_csv, out);
    fmt::print("predicted {} samples for session {}, wrote {}\n", y.size(), s.session_id, args.out_csv.string());
    return kExitOk;
  });
}

int cmd_inspect(const InspectArgs& args) {
  return guarded([&] {
    static const std::vector<std::string> kStages{"filtered", "envelope", "aligned", "repaired", "features"};
    if (std::find(kStages.begin(), kStages.end(), args.stage) == kStages.end()) {
      throw Error(Errc::InvalidSpec, fmt::format("unknown stage '{}' (expected filtered, envelope, aligned, "
                                                 "repaired or features)",
                                                 args.stage));
    }
    const PipelineConfig cfg = resolve_config(args.config);
    const bool has_force = fs::exists(args.session_dir / "force.csv");
    const auto s = session::load_session(args.session_dir, {.read_force = has_force});
    const auto mode = has_force ? pipeline::AlignMode::WithForce : pipeline::AlignMode::Skip;
    const auto tr = pipeline::run(s, cfg, mode);
    const double rate = tr.uniform.sample_rate_hz;
    const auto uniform_t = grid_times(tr.uniform.start_s, rate, tr.uniform.size());

    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& content) {
      io::write_file_atomic(args.out_dir / name, content);
      written.push_back(args.out_dir / name);
    };

    if (args.stage == "filtered" || args.stage == "envelope") {
      for (std::size_t c = 0; c < kImuChannels; ++c) {
        const auto& values = args.stage == "filtered" ? tr.filtered[c] : tr.envelopes[c].values;
        emit(fmt::format("{}_{}.csv", args.stage, kChannelNames[c]), series_csv(args.stage, uniform_t, values));
      }
    } else if (args.stage == "aligned") {
      const auto& a = tr.aligned;
      std::string out = "t";
      for (auto n : kChannelNames) out += fmt::format(",{}", n);
      if (!a.force_n.empty()) out += ",force_n";
      out += '\n';
      for (std::size_t i = 0; i < a.common_length; ++i) {
        out += io::format_g9(a.time_at(i));
        for (std::size_t c = 0; c < kImuChannels; ++c) out += ',' + io::format_g9(a.imu[c][i]);
        if (!a.force_n.empty()) out += ',' + io::format_g9(a.force_n[i]);
        out += '\n';
      }
      emit("aligned.csv", out);
      if (has_force) {
        const auto max_lag = static_cast<long>(std::lround(cfg.alignment.max_lag_s * rate));
        const std::pair<std::string_view, Channel> refs[] = {{"accel", cfg.alignment.accel_reference},
                                                             {"gyro", cfg.alignment.gyro_reference}};
        for (const auto& [group, ref] : refs) {
          std::vector<double> target = tr.envelopes[index(ref)].values;
          if (cfg.alignment.negate_envelope) {
            for (double& v : target) v = -v;
          }
          const auto curve = align::correlation_curve(tr.uniform.force_n, target, max_lag);
          std::string c = "lag_samples,correlation\n";
          for (long k = -max_lag; k <= max_lag; ++k) {
            c += fmt::format("{},{}\n", k, io::format_g9(curve[static_cast<std::size_t>(k + max_lag)]));
          }
          emit(fmt::format("correlation_{}.csv", group), c);
        }
        fmt::print("accel lag {} samples (r = {:.3f}), gyro lag {} samples (r = {:.3f})\n",
                   a.accel_lag.lag_samples, a.accel_lag.peak_correlation, a.gyro_lag.lag_samples,
                   a.gyro_lag.peak_correlation);
      }
    } else if (args.stage == "repaired") {
      // Times are on the envelope grid so rows line up with the envelope dump.
      const auto& r = tr.repaired;
      std::string segs = "channel,start_s,end_s,drop_ratio\n";
      for (std::size_t c = 0; c < kImuChannels; ++c) {
        const auto t = grid_times(tr.uniform.start_s, rate, r.common_length, r.source_offset[c]);
        emit(fmt::format("repaired_{}.csv", kChannelNames[c]), series_csv("repaired", t, r.imu[c]));
        for (const auto& sg : tr.segments[c]) {
          segs += fmt::format("{},{},{},{}\n", kChannelNames[c], io::format_g9(t[sg.start]),
                              io::format_g9(tr.uniform.start_s + static_cast<double>(sg.end + r.source_offset[c]) / rate),
                              io::format_g9(sg.drop_ratio));
        }
      }
      emit("segments.csv", segs);
    } else {
      const auto& m = tr.features;
      emit(fmt::format("features_{}.csv", to_string(m.kind)), matrix_csv(m, "target"));
    }
    for (const auto& p : written) fmt::print("wrote {}\n", p.string());
    return kExitOk;
  });
}

}  // namespace vfe::cli
