#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "vfe/alignment.hpp"
#include "vfe/dsp.hpp"
#include "vfe/features.hpp"
#include "vfe/model.hpp"
#include "vfe/pipeline.hpp"
#include "vfe/simulator.hpp"

namespace {

// 40 s of a noisy 136 Hz carrier at 400 Hz, the default session shape.
std::vector<double> carrier(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.02);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 400.0;
    x[i] = (1.0 + 0.3 * std::sin(0.5 * t)) * std::sin(2.0 * std::numbers::pi * 136.0 * t) + g(rng);
  }
  return x;
}

void BM_FilterZeroPhase(benchmark::State& state) {
  const auto coeffs = vfe::dsp::design_bandpass({});
  const auto x = carrier(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vfe::dsp::filter_zero_phase(x, coeffs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterZeroPhase)->Arg(16000)->Arg(160000);

void BM_Envelope(benchmark::State& state) {
  const auto x = carrier(static_cast<std::size_t>(state.range(0)));
  const vfe::dsp::EnvelopeOptions opts{0.5 / 136.0, 136.0};
  for (auto _ : state) benchmark::DoNotOptimize(vfe::dsp::full_envelope(x, 400.0, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Envelope)->Arg(16000)->Arg(160000);

void BM_EstimateLag(benchmark::State& state) {
  const std::size_t n = 16000;
  std::vector<double> ref(n), target(n);
  for (std::size_t i = 0; i < n; ++i) {
    ref[i] = std::sin(0.003 * static_cast<double>(i)) + 0.2 * std::sin(0.041 * static_cast<double>(i));
    target[i] = -std::sin(0.003 * static_cast<double>(i + 37)) - 0.2 * std::sin(0.041 * static_cast<double>(i + 37));
  }
  const long max_lag = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(vfe::align::estimate_lag(ref, target, max_lag));
}
BENCHMARK(BM_EstimateLag)->Arg(200)->Arg(800);

void BM_RidgeFit(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  vfe::features::FeatureMatrix x;
  x.kind = vfe::ModelKind::Relative;
  for (int c = 0; c < 8; ++c) x.column_names.push_back("x" + std::to_string(c));
  x.n_samples = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < x.n_samples; ++i) {
    double y = 0.0;
    for (int c = 0; c < 8; ++c) {
      const double v = g(rng);
      x.values.push_back(v);
      y += (c - 3.5) * v;
    }
    x.target.push_back(y + 0.1 * g(rng));
    x.time_s.push_back(static_cast<double>(i) / 400.0);
  }
  x.provenance.push_back({"bench", 0, x.n_samples});
  for (auto _ : state) benchmark::DoNotOptimize(vfe::model::ridge_fit(x, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RidgeFit)->Arg(16000)->Arg(200000);

void BM_SessionPipeline(benchmark::State& state) {
  vfe::sim::SimulationSpec spec;
  spec.seed = 3;
  spec.trajectory = vfe::sim::SquareParams{};
  spec.accel_clock_offset_s = 0.1;
  const auto session = vfe::sim::synthesize_session(spec);
  for (auto _ : state) benchmark::DoNotOptimize(vfe::pipeline::run(session, vfe::PipelineConfig{}));
}
BENCHMARK(BM_SessionPipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
