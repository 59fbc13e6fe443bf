#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vfe/config.hpp"
#include "vfe/error.hpp"
#include "vfe/features.hpp"
#include "vfe/pipeline.hpp"
#include "vfe/simulator.hpp"

using namespace vfe;

TEST(Magnitude, Basics) {
  const std::vector<double> x{3.0, 0.0}, y{4.0, 0.0}, z{0.0, 0.0};
  const auto m = features::magnitude(x, y, z);
  EXPECT_EQ(m[0], 5.0);
  EXPECT_EQ(m[1], 0.0);
  try {
    features::magnitude(x, y, std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(Magnitude, MatchesElementLoop) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(200), y(200), z(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
    z[i] = u(rng);
  }
  const auto m = features::magnitude(x, y, z);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_NEAR(m[i], std::hypot(x[i], y[i], z[i]), 1e-12);
}

TEST(Percentile, MatchesSortingOracle) {
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i);
  EXPECT_NEAR(features::percentile(ramp, 5.0), 4.95, 1e-12);
  EXPECT_NEAR(features::percentile(ramp, 95.0), 94.05, 1e-12);

  std::mt19937 rng(2);
  std::normal_distribution<double> g(0.0, 3.0);
  for (std::size_t n : {1u, 2u, 7u, 64u, 1001u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    for (double p : {0.0, 5.0, 37.5, 50.0, 95.0, 100.0}) {
      EXPECT_NEAR(features::percentile(x, p), oracle::sorted_percentile(x, p), 1e-12) << n << " " << p;
    }
  }
}

TEST(PercentileScale, AnchorsMapToZeroAndHundred) {
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i);
  const auto s = features::percentile_scale(ramp);
  EXPECT_NEAR(s.anchors.p5(), 4.95, 1e-12);
  EXPECT_NEAR(s.anchors.p95(), 94.05, 1e-12);
  EXPECT_NEAR(s.anchors.scale(4.95), 0.0, 1e-12);
  EXPECT_NEAR(s.anchors.scale(94.05), 100.0, 1e-12);
  // Tails are kept, not clipped.
  EXPECT_LT(s.values.front(), 0.0);
  EXPECT_GT(s.values.back(), 100.0);
}

TEST(PercentileScale, ConstantIsDegenerate) {
  try {
    features::percentile_scale(std::vector<double>(50, 2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateRange);
  }
}

TEST(PercentileScale, AffineInvariantAndRoundTrip) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(300);
  for (auto& v : x) v = u(rng);
  const auto base = features::percentile_scale(x);
  std::vector<double> y(x);
  for (auto& v : y) v = 4.0 * v + 11.0;
  const auto moved = features::percentile_scale(y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(moved.values[i], base.values[i], 1e-9);
    EXPECT_NEAR(base.anchors.unscale(base.values[i]), x[i], 1e-12);
  }
}

TEST(Units, NewtonsToPounds) {
  const auto lb = features::newtons_to_pounds(std::vector<double>{0.0, 100.0, 4.448});
  EXPECT_EQ(lb[0], 0.0);
  EXPECT_EQ(lb[1], 22.4809);
  EXPECT_NEAR(lb[2], 0.99995, 1e-5);
}

TEST(AbsoluteFeatures, SchemaAndMagnitudes) {
  const auto a = fixtures::smooth_aligned(800, 400.0, 4);
  const auto m = features::build_absolute_features(a, "s");
  const std::vector<std::string> expected{"accel_x", "accel_y", "accel_z", "gyro_x",
                                          "gyro_y",  "gyro_z",  "accel_mag", "gyro_mag"};
  EXPECT_EQ(m.column_names, expected);
  ASSERT_EQ(m.n_samples, 800u);
  for (std::size_t r = 0; r < m.n_samples; ++r) {
    EXPECT_NEAR(m.at(r, 6), std::sqrt(m.at(r, 0) * m.at(r, 0) + m.at(r, 1) * m.at(r, 1) + m.at(r, 2) * m.at(r, 2)),
                1e-12);
    EXPECT_NEAR(m.target[r], a.force_n[r] * 0.224809, 1e-12 * a.force_n[r]);
    EXPECT_EQ(m.at(r, 4), a.imu[4][r]);
  }
  ASSERT_EQ(m.provenance.size(), 1u);
  EXPECT_EQ(m.provenance[0].session_id, "s");
}

TEST(AbsoluteFeatures, ZeroGyroGivesZeroMagnitude) {
  auto a = fixtures::smooth_aligned(100, 400.0, 5);
  for (std::size_t c = 3; c < 6; ++c) std::fill(a.imu[c].begin(), a.imu[c].end(), 0.0);
  const auto m = features::build_absolute_features(a, "s");
  for (std::size_t r = 0; r < m.n_samples; ++r) EXPECT_EQ(m.at(r, 7), 0.0);
}

TEST(AbsoluteFeatures, SimulatedSessionMagnitudes) {
  sim::SimulationSpec spec;
  spec.seed = 12;
  spec.duration_s = 12.0;
  spec.trajectory = sim::SquareParams{};
  const auto m = pipeline::session_features(sim::synthesize_session(spec), PipelineConfig{});
  for (std::size_t r = 0; r < m.n_samples; ++r) {
    const double direct = std::sqrt(m.at(r, 0) * m.at(r, 0) + m.at(r, 1) * m.at(r, 1) + m.at(r, 2) * m.at(r, 2));
    ASSERT_NEAR(m.at(r, 6), direct, 1e-12);
  }
}

TEST(RelativeFeatures, SchemaAndAnchors) {
  const auto a = fixtures::smooth_aligned(1000, 400.0, 6);
  const auto m = features::build_relative_features(a, "s");
  EXPECT_EQ(m.column_names, (std::vector<std::string>{"accel_x_pct", "gyro_y_pct"}));
  const auto anchors = features::percentile_scale(a.force_n).anchors;
  EXPECT_NEAR(anchors.scale(anchors.p5()), 0.0, 1e-12);
  EXPECT_NEAR(anchors.scale(anchors.p95()), 100.0, 1e-12);
  EXPECT_NEAR(features::percentile(m.target, 5.0), 0.0, 1e-9);
  EXPECT_NEAR(features::percentile(m.target, 95.0), 100.0, 1e-9);
  const auto ax = features::percentile_scale(a.imu[0]).values;
  for (std::size_t r = 0; r < m.n_samples; ++r) EXPECT_EQ(m.at(r, 0), ax[r]);
}

TEST(RelativeFeatures, TargetTracksAbsoluteTarget) {
  sim::SimulationSpec spec;
  spec.seed = 13;
  spec.duration_s = 12.0;
  spec.trajectory = sim::SineParams{};
  const auto s = sim::synthesize_session(spec);
  PipelineConfig cfg;
  const auto abs = pipeline::session_features(s, cfg);
  cfg.kind = ModelKind::Relative;
  const auto rel = pipeline::session_features(s, cfg);
  ASSERT_EQ(abs.n_samples, rel.n_samples);
  EXPECT_GE(oracle::pearson(abs.target, rel.target), 0.999);
}

TEST(RelativeFeatures, ConstantChannelIsDegenerate) {
  auto a = fixtures::smooth_aligned(200, 400.0, 7);
  std::fill(a.imu[4].begin(), a.imu[4].end(), 1.0);
  try {
    features::build_relative_features(a, "s");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateRange);
  }
}

TEST(FeatureMatrix, ConcatenateKeepsProvenance) {
  const auto a = features::build_absolute_features(fixtures::smooth_aligned(50, 400.0, 8), "a");
  const auto b = features::build_absolute_features(fixtures::smooth_aligned(70, 400.0, 9), "b");
  const std::vector parts{a, b};
  const auto m = features::concatenate(parts);
  EXPECT_EQ(m.n_samples, 120u);
  ASSERT_EQ(m.provenance.size(), 2u);
  EXPECT_EQ(m.provenance[1].session_id, "b");
  EXPECT_EQ(m.provenance[1].begin, 50u);
  EXPECT_EQ(m.provenance[1].end, 120u);
  EXPECT_EQ(m.at(60, 3), b.at(10, 3));

  const auto r = features::build_relative_features(fixtures::smooth_aligned(50, 400.0, 10), "r");
  const std::vector mixed{a, r};
  EXPECT_THROW(features::concatenate(mixed), Error);
}

TEST(FeatureMatrix, NoForceMeansNoTarget) {
  auto a = fixtures::smooth_aligned(40, 400.0, 11);
  a.force_n.clear();
  const auto m = features::build_absolute_features(a, "s");
  EXPECT_FALSE(m.has_target());
  EXPECT_EQ(m.n_samples, 40u);
}
