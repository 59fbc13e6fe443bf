// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <sys/wait.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vfe/artifact.hpp"
#include "vfe/dsp.hpp"
#include "vfe/error.hpp"
#include "vfe/evaluation.hpp"
#include "vfe/features.hpp"
#include "vfe/io.hpp"
#include "vfe/model.hpp"
#include "vfe/pipeline.hpp"
#include "vfe/session.hpp"
#include "vfe/simulator.hpp"

namespace fs = std::filesystem;
using namespace vfe;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(VFE_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Scratch {
  testing_support::TempDir dir;
  fs::path corpus() const { return dir / "corpus"; }
  bool corpus_ready = false;
  std::string corpus_error;
  double simulate_s = 0.0;
};

void ensure_corpus(Scratch& s) {
  if (s.corpus_ready || !s.corpus_error.empty()) return;
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = cli("simulate --seed 7 --out " + s.corpus().string(), s.dir / "simulate.log");
  s.simulate_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0) {
    s.corpus_error = fmt::format("simulate exited {}: {}", rc, io::read_file(s.dir / "simulate.log"));
  } else {
    s.corpus_ready = true;
  }
}

// Runs `vfe evaluate --kind <kind>` on the default corpus; returns the report
// and the wall time of simulate + evaluate.
std::pair<json, double> evaluate_default(Scratch& s, const std::string& kind) {
  ensure_corpus(s);
  if (!s.corpus_ready) throw std::runtime_error(s.corpus_error);
  const auto out = s.dir / ("eval_" + kind);
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = cli(fmt::format("evaluate --kind {} --corpus {} --out {}", kind, s.corpus().string(), out.string()),
                     s.dir / "evaluate.log");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0) {
    throw std::runtime_error(fmt::format("evaluate exited {}: {}", rc, io::read_file(s.dir / "evaluate.log")));
  }
  return {json::parse(io::read_file(out / fmt::format("evaluation_{}.json", kind))), secs + s.simulate_s};
}

// Hold-one-out with a single ideal feature 1 / (1 + k F) computed from the
// true force: the best any linear model on damped amplitude can do.
std::pair<double, std::string> ideal_feature_min_r2(const Scratch& s) {
  const auto specs = sim::load_manifest(s.corpus() / "manifest.json");
  std::vector<features::FeatureMatrix> per_session;
  for (const auto& spec : specs) {
    const auto force = sim::generate_force_trajectory(spec);
    features::FeatureMatrix m;
    m.kind = ModelKind::Relative;  // no standardization; one raw column
    m.column_names = {"ideal_amplitude"};
    m.n_samples = force.size();
    m.target = features::newtons_to_pounds(force.values);
    for (double lb : m.target) m.values.push_back(sim::damping_amplitude(lb, spec.damping_k));
    m.time_s = force.timestamps;
    m.provenance.push_back({spec.session_id, 0, m.n_samples});
    per_session.push_back(std::move(m));
  }
  const auto report = eval::hold_one_out(per_session, 0.0);
  const auto worst = std::min_element(report.folds.begin(), report.folds.end(),
                                      [](const auto& a, const auto& b) { return a.r2 < b.r2; });
  return {worst->r2, worst->held_out_session};
}

Outcome criterion_1(Scratch& s) {
  const auto [report, secs] = evaluate_default(s, "absolute");
  const double mae = report.at("mae").at("mean").get<double>();
  double min_r2 = INFINITY;
  std::string worst;
  for (const auto& f : report.at("folds")) {
    if (f.at("r2").get<double>() < min_r2) {
      min_r2 = f.at("r2").get<double>();
      worst = f.at("held_out_session").get<std::string>();
    }
  }
  const bool folds_ok = report.at("n_folds").get<int>() == 15;
  const bool pass = folds_ok && mae <= 1.88 && min_r2 >= 0.9 && secs <= 60.0;
  auto [ideal_r2, ideal_worst] = ideal_feature_min_r2(s);
  return {pass, fmt::format("mean MAE {:.3f} lb (<= 1.88), min fold R^2 {:.3f} at {} (>= 0.9), {:.1f} s (<= 60); "
                            "ideal noise-free amplitude feature reaches min fold R^2 {:.3f} at {}",
                            mae, min_r2, worst, secs, ideal_r2, ideal_worst)};
}

Outcome criterion_2(Scratch& s) {
  const auto [report, secs] = evaluate_default(s, "relative");
  const double mae = report.at("mae").at("mean").get<double>();
  return {mae <= 10.07 && report.at("n_folds").get<int>() == 15,
          fmt::format("mean MAE {:.2f}% (<= 10.07), {:.1f} s", mae, secs)};
}

Outcome criterion_3(Scratch&) {
  const auto f = dsp::design_bandpass({});
  auto db = [&](double hz) { return 20.0 * std::log10(std::abs(dsp::frequency_response(f, hz, 400.0))); };
  auto db_oracle = [&](double hz) { return 20.0 * std::log10(oracle::expanded_magnitude(f, hz, 400.0)); };
  const double center = std::abs(dsp::frequency_response(f, 136.0, 400.0));
  const double center_oracle = oracle::expanded_magnitude(f, 136.0, 400.0);
  double radius = 0.0;
  for (const auto& sec : f.sections) radius = std::max(radius, oracle::max_pole_radius(sec));
  const bool pass = center >= 0.99 && center_oracle >= 0.99 && db(111.0) <= -40.0 && db(161.0) <= -40.0 &&
                    db_oracle(111.0) <= -40.0 && db_oracle(161.0) <= -40.0 && dsp::is_stable(f) && radius < 1.0;
  return {pass, fmt::format("|H(136)| {:.6f} / oracle {:.6f}; 111 Hz {:.1f} dB, 161 Hz {:.1f} dB "
                            "(oracle {:.1f}, {:.1f}); max pole radius {:.6f}",
                            center, center_oracle, db(111.0), db(161.0), db_oracle(111.0), db_oracle(161.0), radius)};
}

Outcome criterion_4(Scratch&) {
  const double fs = 400.0;
  const std::size_t n = 4000;
  const dsp::EnvelopeOptions opts{0.5 / 136.0, 136.0};
  double worst_sine = 0.0;
  for (double amp : {0.01, 0.5, 1.0, 3.0, 250.0}) {
    for (double phase : {0.0, 0.7, 2.1}) {
      const auto env = dsp::full_envelope(fixtures::tone(n, 136.0, fs, amp, phase), fs, opts).values;
      for (std::size_t i = n / 10; i < n - n / 10; ++i) {
        worst_sine = std::max(worst_sine, std::abs(env[i] - 2.0 * amp) / (2.0 * amp));
      }
    }
  }
  double worst_am = 0.0;
  std::vector<double> am(n);
  auto a_of = [&](std::size_t i) { return 1.0 - 0.8 * static_cast<double>(i) / static_cast<double>(n - 1); };
  for (std::size_t i = 0; i < n; ++i) am[i] = a_of(i) * std::sin(2.0 * std::numbers::pi * 136.0 * static_cast<double>(i) / fs);
  const auto env = dsp::full_envelope(am, fs, opts).values;
  for (std::size_t i = n / 10; i < n - n / 10; ++i) {
    worst_am = std::max(worst_am, std::abs(env[i] - 2.0 * a_of(i)) / (2.0 * a_of(i)));
  }
  return {worst_sine <= 0.02 && worst_am <= 0.05,
          fmt::format("pure sine worst error {:.3f}% (<= 2%), AM ramp worst error {:.3f}% (<= 5%)",
                      100.0 * worst_sine, 100.0 * worst_am)};
}

Outcome criterion_5(Scratch&) {
  sim::CorpusOptions opts;
  opts.n_sessions = 20;
  opts.base_seed = 2024;
  opts.dropouts_per_session = 0;
  auto specs = sim::plan_corpus(opts);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> offset(-400, 400);
  std::map<std::string, std::pair<int, int>> by_kind;  // recovered, total lags
  int hits = 0;
  int total = 0;
  long worst = 0;
  for (auto& spec : specs) {
    const int oa = offset(rng);
    const int og = offset(rng);
    spec.accel_clock_offset_s = oa / spec.imu_rate_hz;
    spec.gyro_clock_offset_s = og / spec.imu_rate_hz;
    auto& tally = by_kind[std::string(to_string(sim::kind_of(spec.trajectory)))];
    long ea = 0;
    long eg = 0;
    try {
      const auto tr = pipeline::run(sim::synthesize_session(spec), PipelineConfig{});
      ea = tr.aligned.accel_lag.lag_samples - oa;
      eg = tr.aligned.gyro_lag.lag_samples - og;
    } catch (const Error& e) {
      ea = eg = 100000;
    }
    for (long e : {ea, eg}) {
      ++total;
      ++tally.second;
      if (std::abs(e) <= 1) {
        ++hits;
        ++tally.first;
      }
      if (std::abs(e) > std::abs(worst)) worst = e;
    }
  }
  std::string breakdown;
  for (const auto& [kind, t] : by_kind) breakdown += fmt::format(" {} {}/{}", kind, t.first, t.second);
  return {hits == total,
          fmt::format("{}/{} group lags within 1 sample (by trajectory:{}); worst error {} samples", hits, total,
                      breakdown, worst)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Median of the 0.1 s before the span over the median inside it.
double injected_ratio(const std::vector<double>& x, std::size_t start, std::size_t len) {
  return median({x.begin() + static_cast<std::ptrdiff_t>(start - 40), x.begin() + static_cast<std::ptrdiff_t>(start)}) /
         median({x.begin() + static_cast<std::ptrdiff_t>(start),
                 x.begin() + static_cast<std::ptrdiff_t>(start + len)});
}

Outcome criterion_6(Scratch&) {
  // Envelopes of simulated constant-force sessions, with collapses injected
  // into the envelope itself.
  std::vector<std::vector<double>> envs;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    sim::SimulationSpec spec;
    spec.seed = 300 + seed;
    spec.duration_s = 10.0;
    spec.trajectory = sim::RampParams{4.0 + 3.0 * seed, 4.0 + 3.0 * seed};
    const auto tr = pipeline::run(sim::synthesize_session(spec), PipelineConfig{}, pipeline::AlignMode::Skip);
    envs.push_back(tr.envelopes[index(static_cast<Channel>(seed))].values);
  }
  const double fs = 400.0;
  const artifact::ArtifactParams params;
  int detected = 0, injected = 0, false_flags = 0, shallow = 0;
  double worst_overlap = 1.0, worst_dev = 0.0;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    for (double fraction : {1.0 / 500.0, 1.0 / 1000.0, 5e-4, 1e-5}) {
      for (std::size_t len : {48u, 60u, 120u, 400u}) {
        const std::size_t start = 900 + 173 * e;
        const auto hit = fixtures::with_collapse(envs[e], start, len, fraction, 8);
        const auto segs = artifact::detect_dropouts(hit, fs, params);
        // Ground-truth drop ratio over the known span. Noise puts an injected
        // 1/500 on either side of the threshold, so the measured ratio decides.
        if (injected_ratio(hit, start, len) < params.drop_ratio_threshold) {
          ++shallow;
          false_flags += !segs.empty();
          continue;
        }
        ++injected;
        double overlap = 0.0;
        for (const auto& sg : segs) {
          const std::size_t lo = std::max(sg.start, start);
          const std::size_t hi = std::min(sg.end, start + len);
          if (hi > lo) overlap = std::max(overlap, static_cast<double>(hi - lo) / static_cast<double>(len));
        }
        if (segs.size() == 1 && overlap >= 0.9) ++detected;
        worst_overlap = std::min(worst_overlap, overlap);
        const auto fixed = artifact::repair_dropouts(hit, segs, fs, params);
        for (std::size_t i = start; i < start + len + 8; ++i) {
          worst_dev = std::max(worst_dev, std::abs(fixed[i] - envs[e][i]) / envs[e][i]);
        }
      }
    }
    for (double fraction : {0.5, 0.1, 0.01, 1.0 / 250.0, 1.0 / 450.0}) {
      for (std::size_t len : {48u, 120u, 400u}) {
        ++shallow;
        const auto hit = fixtures::with_collapse(envs[e], 1500, len, fraction, 8);
        if (!artifact::detect_dropouts(hit, fs, params).empty()) ++false_flags;
      }
    }
  }
  return {detected == injected && worst_dev <= 0.05 && false_flags == 0,
          fmt::format("{}/{} collapses (>= 500x, >= 0.12 s) detected, worst overlap {:.1f}% (>= 90%); "
                      "worst repaired deviation {:.2f}% (<= 5%); {}/{} collapses measuring under 500x flagged (0)",
                      detected, injected, 100.0 * worst_overlap, 100.0 * worst_dev, false_flags, shallow)};
}

Outcome criterion_7(Scratch&) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> n_dist(20, 100), p_dist(1, 8);
  std::normal_distribution<double> g(0.0, 1.0);
  const double lambdas[] = {0.0, 0.1, 1.0, 10.0};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = n_dist(rng), p = p_dist(rng);
    const double lambda = lambdas[trial % 4];
    features::FeatureMatrix x;
    x.kind = ModelKind::Relative;
    for (std::size_t c = 0; c < p; ++c) x.column_names.push_back(fmt::format("x{}", c));
    x.n_samples = n;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(p);
      double y = 1.5;
      for (std::size_t c = 0; c < p; ++c) {
        r[c] = (1.0 + static_cast<double>(c)) * g(rng) + 0.5 * static_cast<double>(c);
        y += (static_cast<double>(c) - 2.0) * r[c];
        x.values.push_back(r[c]);
      }
      x.target.push_back(y + 0.3 * g(rng));
      rows.push_back(std::move(r));
    }
    x.time_s.assign(n, 0.0);
    x.provenance.push_back({"random", 0, n});
    const auto fit = model::ridge_fit(x, lambda);
    const auto ref = oracle::ridge_by_inversion(rows, x.target, lambda);
    for (std::size_t c = 0; c < p; ++c) {
      worst = std::max(worst, std::abs(fit.weights[c] - ref.weights[c]) / std::max(std::abs(ref.weights[c]), 1e-300));
    }
    worst = std::max(worst, std::abs(fit.intercept - ref.intercept) / std::max(std::abs(ref.intercept), 1e-300));
  }
  return {worst <= 1e-8, fmt::format("worst relative coefficient error {:.2e} over 100 instances (<= 1e-8)", worst)};
}

Outcome criterion_8(Scratch&) {
  struct Fixture {
    std::vector<double> t, p;
    double r2, mae, rmse;
  };
  // Two-point fixtures worked by hand.
  const Fixture fixtures[] = {
      {{0.0, 2.0}, {1.0, 1.0}, 0.0, 1.0, 1.0},
      {{1.0, 3.0}, {1.0, 3.0}, 1.0, 0.0, 0.0},
      {{0.0, 4.0}, {1.0, 3.0}, 0.75, 1.0, 1.0},
      {{0.0, 2.0}, {2.0, 0.0}, -3.0, 2.0, 2.0},
      {{0.0, 4.0}, {0.0, 1.0}, -0.125, 1.5, std::sqrt(4.5)},
  };
  int exact = 0;
  for (const auto& f : fixtures) {
    exact += eval::metric_r2(f.t, f.p) == f.r2 && eval::metric_mae(f.t, f.p) == f.mae &&
             eval::metric_rmse(f.t, f.p) == f.rmse;
  }
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(1, 200);
  int ordered = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    std::vector<double> t(len(rng)), p(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = 10.0 * g(rng);
      p[k] = t[k] + (i % 2 ? 0.1 : 5.0) * g(rng);
    }
    ordered += eval::metric_rmse(t, p) >= eval::metric_mae(t, p);
  }
  return {exact == 5 && ordered == trials,
          fmt::format("{}/5 hand fixtures exact; RMSE >= MAE on {}/{} random fixtures", exact, ordered, trials)};
}

Outcome criterion_9(Scratch&) {
  const double lb = features::newtons_to_pounds(std::vector<double>{100.0})[0];
  return {lb == 22.4809, fmt::format("100 N -> {} lb", io::format_g9(lb))};
}

Outcome criterion_10(Scratch& s) {
  ensure_corpus(s);
  if (!s.corpus_ready) return {false, s.corpus_error};
  const auto second = s.dir / "corpus_again";
  if (cli("simulate --seed 7 --out " + second.string(), s.dir / "simulate2.log") != 0) {
    return {false, "second simulate failed"};
  }
  std::size_t files = 0, equal = 0;
  for (const auto& e : fs::recursive_directory_iterator(s.corpus())) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), s.corpus());
    equal += fs::exists(second / rel) &&
             io::sha256_hex(io::read_file(e.path())) == io::sha256_hex(io::read_file(second / rel));
  }

  const auto specs = sim::load_manifest(s.corpus() / "manifest.json");
  double worst_rel = 0.0;
  for (const auto& spec : specs) {
    const auto fresh = sim::synthesize_session(spec);
    const auto stored = session::load_session(s.corpus() / spec.session_id);
    auto compare = [&](const std::vector<double>& a, const std::vector<double>& b) {
      if (a.size() != b.size()) {
        worst_rel = INFINITY;
        return;
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i] != 0.0) worst_rel = std::max(worst_rel, std::abs(a[i] - b[i]) / std::abs(b[i]));
        else if (a[i] != 0.0) worst_rel = INFINITY;
      }
    };
    for (std::size_t c = 0; c < kImuChannels; ++c) compare(stored.imu.channels[c], fresh.imu.channels[c]);
    compare(stored.imu.timestamps, fresh.imu.timestamps);
    compare(stored.force.values, fresh.force.values);
  }

  std::vector<session::SessionRecording> corpus;
  for (const auto& dir : session::discover_sessions(s.corpus())) corpus.push_back(session::load_session(dir));
  const auto parts = pipeline::corpus_features(corpus, PipelineConfig{});
  const auto all = features::concatenate(parts);
  const auto trained = model::ridge_fit(all, model::kDefaultLambda);
  model::save_model(trained, s.dir / "model.json");
  const auto loaded = model::load_model(s.dir / "model.json");
  const auto pa = model::predict(trained, all);
  const auto pb = model::predict(loaded, all);
  const bool bitwise = pa == pb;

  return {files > 0 && equal == files && worst_rel <= 5e-9 && bitwise,
          fmt::format("{}/{} regenerated files hash-equal; worst CSV round-trip error {:.2e} relative (<= 5e-9, "
                      "9 significant digits); model reload predictions {}",
                      equal, files, worst_rel, bitwise ? "bitwise equal" : "differ")};
}

}  // namespace

int main() {
  Scratch scratch;
  const std::vector<std::pair<std::string, std::function<Outcome(Scratch&)>>> criteria{
      {"synthetic end-to-end, absolute", criterion_1},
      {"synthetic end-to-end, relative", criterion_2},
      {"filter response", criterion_3},
      {"envelope accuracy", criterion_4},
      {"lag recovery", criterion_5},
      {"dropout handling", criterion_6},
      {"ridge oracle equivalence", criterion_7},
      {"metric definitions", criterion_8},
      {"unit conversion", criterion_9},
      {"determinism and round-trips", criterion_10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second(scratch);
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    failures += o.pass ? 0 : 1;
    fmt::print("{} {:>2} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
