#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vfe/config.hpp"
#include "vfe/features.hpp"
#include "vfe/model.hpp"
#include "vfe/session.hpp"

namespace vfe::eval {

// R^2 = 1 - SSres / SStot; throws Error(ZeroVarianceTarget) when SStot == 0.
double metric_r2(std::span<const double> y_true, std::span<const double> y_pred);
double metric_mae(std::span<const double> y_true, std::span<const double> y_pred);
double metric_rmse(std::span<const double> y_true, std::span<const double> y_pred);

struct FoldResult {
  std::string held_out_session;
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n_test_samples = 0;
  std::vector<std::string> training_sessions;
};

// Mean, population SD, and extremes of one metric across folds.
struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
  double best = 0.0;
  double worst = 0.0;
};

MetricSummary summarize(std::span<const double> values);

struct FoldTrace {
  std::string session_id;
  std::vector<double> time_s;
  std::vector<double> y_true;
  std::vector<double> y_pred;
};

struct EvaluationReport {
  ModelKind kind = ModelKind::Absolute;
  std::vector<FoldResult> folds;
  MetricSummary mae;
  MetricSummary rmse;
  std::vector<std::string> outlier_sessions;
  std::size_t total_samples = 0;
  double lambda = 0.0;
  std::string pipeline_config_hash;
  std::vector<model::ForceModel> fold_models;  // one per fold, same order
  std::vector<FoldTrace> traces;               // one per fold, same order

  std::string unit() const { return kind == ModelKind::Absolute ? "lb" : "percent"; }
};

// Folds whose MAE is strictly above mean + k * SD (population SD). Values
// within 1e-9 relative of the threshold count as on it.
std::vector<std::string> flag_outliers(std::span<const FoldResult> folds, double sd_multiplier = 2.0);

// Hold-one-out over precomputed per-session matrices: each fold trains on
// all other sessions and tests on the held-out one.
EvaluationReport hold_one_out(std::span<const features::FeatureMatrix> per_session, double lambda,
                              double outlier_sd_multiplier = 2.0);

// Runs the pipeline on every session (in parallel), then hold_one_out.
// A failing session aborts the run with its id in the error.
EvaluationReport hold_one_out(std::span<const session::SessionRecording> corpus, const PipelineConfig& config);

std::string report_to_json(const EvaluationReport& report, const PipelineConfig& config);
// Header fold,session_id,r2,mae,rmse,n
std::string report_to_csv(const EvaluationReport& report);
// Header t,y_true,y_pred
std::string trace_to_csv(const FoldTrace& trace);

}  // namespace vfe::eval
