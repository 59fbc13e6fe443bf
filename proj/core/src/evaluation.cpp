#include "vfe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "vfe/error.hpp"
#include "vfe/io.hpp"
#include "vfe/pipeline.hpp"

namespace vfe::eval {

using features::FeatureMatrix;
using nlohmann::json;

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, fmt::format("metric inputs have lengths {} and {}", a.size(), b.size()));
  }
  if (a.empty()) throw Error(Errc::ArraysTooShort, "metric of empty series");
}

std::string session_of(const FeatureMatrix& m) {
  return m.provenance.empty() ? std::string() : m.provenance.front().session_id;
}

}  // namespace

double metric_r2(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred);
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw Error(Errc::ZeroVarianceTarget, "R^2 is undefined for a constant target");
  return 1.0 - ss_res / ss_tot;
}

double metric_mae(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred);
  double acc = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) acc += std::abs(y_true[i] - y_pred[i]);
  return acc / static_cast<double>(y_true.size());
}

double metric_rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred);
  double acc = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) acc += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  return std::sqrt(acc / static_cast<double>(y_true.size()));
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(var / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.best = *lo;
  s.worst = *hi;
  return s;
}

std::vector<std::string> flag_outliers(std::span<const FoldResult> folds, double sd_multiplier) {
  std::vector<double> maes;
  maes.reserve(folds.size());
  for (const auto& f : folds) maes.push_back(f.mae);
  const MetricSummary s = summarize(maes);
  const double threshold = s.mean + sd_multiplier * s.sd;
  const double slack = 1e-9 * std::max(1.0, std::abs(threshold));
  std::vector<std::string> out;
  for (const auto& f : folds) {
    if (f.mae - threshold > slack) out.push_back(f.held_out_session);
  }
  return out;
}

EvaluationReport hold_one_out(std::span<const FeatureMatrix> per_session, double lambda,
                              double outlier_sd_multiplier) {
  if (per_session.size() < 3) {
    throw Error(Errc::ArraysTooShort,
                fmt::format("hold-one-out needs at least 3 sessions, got {}", per_session.size()));
  }
  EvaluationReport report;
  report.kind = per_session.front().kind;
  report.lambda = lambda;

  for (std::size_t held = 0; held < per_session.size(); ++held) {
    const FeatureMatrix& test = per_session[held];
    std::vector<FeatureMatrix> train_parts;
    train_parts.reserve(per_session.size() - 1);
    for (std::size_t j = 0; j < per_session.size(); ++j) {
      if (j != held) train_parts.push_back(per_session[j]);
    }
    const FeatureMatrix train = features::concatenate(train_parts);

    FoldResult fold;
    fold.held_out_session = session_of(test);
    for (const auto& block : train.provenance) fold.training_sessions.push_back(block.session_id);

    model::ForceModel fitted;
    std::vector<double> pred;
    try {
      fitted = model::ridge_fit(train, lambda);
      pred = model::predict(fitted, test);
      fold.r2 = metric_r2(test.target, pred);
    } catch (const Error& e) {
      throw e.with_context(fmt::format("fold holding out {}", fold.held_out_session));
    }
    fold.mae = metric_mae(test.target, pred);
    fold.rmse = metric_rmse(test.target, pred);
    fold.n_test_samples = test.n_samples;
    report.total_samples += test.n_samples;

    report.traces.push_back({fold.held_out_session, test.time_s, test.target, pred});
    report.fold_models.push_back(std::move(fitted));
    report.folds.push_back(std::move(fold));
  }

  std::vector<double> maes;
  std::vector<double> rmses;
  for (const auto& f : report.folds) {
    maes.push_back(f.mae);
    rmses.push_back(f.rmse);
  }
  report.mae = summarize(maes);
  report.rmse = summarize(rmses);
  report.outlier_sessions = flag_outliers(report.folds, outlier_sd_multiplier);
  return report;
}

EvaluationReport hold_one_out(std::span<const session::SessionRecording> corpus, const PipelineConfig& config) {
  config.validate();
  const auto per_session = pipeline::corpus_features(corpus, config);

  EvaluationReport report = hold_one_out(per_session, config.lambda, config.outlier_sd_multiplier);
  report.pipeline_config_hash = config_hash(config);
  for (auto& m : report.fold_models) m.pipeline_config_hash = report.pipeline_config_hash;
  return report;
}

std::string report_to_json(const EvaluationReport& r, const PipelineConfig& config) {
  json folds = json::array();
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    const auto& f = r.folds[i];
    folds.push_back({{"fold", i},
                     {"held_out_session", f.held_out_session},
                     {"r2", f.r2},
                     {"mae", f.mae},
                     {"rmse", f.rmse},
                     {"n_test_samples", f.n_test_samples},
                     {"training_sessions", f.training_sessions}});
  }
  auto summary = [](const MetricSummary& s) {
    return json{{"mean", s.mean}, {"sd", s.sd}, {"best", s.best}, {"worst", s.worst}};
  };
  json j;
  j["schema_version"] = 1;
  j["kind"] = std::string(to_string(r.kind));
  j["unit"] = r.unit();
  j["lambda"] = r.lambda;
  j["n_folds"] = r.folds.size();
  j["total_samples"] = r.total_samples;
  j["mae"] = summary(r.mae);
  j["rmse"] = summary(r.rmse);
  j["outlier_sessions"] = r.outlier_sessions;
  j["folds"] = std::move(folds);
  j["pipeline_config_hash"] = r.pipeline_config_hash;
  j["config"] = json::parse(to_json(config));
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvaluationReport& r) {
  std::string out = "fold,session_id,r2,mae,rmse,n\n";
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    const auto& f = r.folds[i];
    out += fmt::format("{},{},{},{},{},{}\n", i, f.held_out_session, io::format_g9(f.r2), io::format_g9(f.mae),
                       io::format_g9(f.rmse), f.n_test_samples);
  }
  return out;
}

std::string trace_to_csv(const FoldTrace& t) {
  std::string out = "t,y_true,y_pred\n";
  out.reserve(t.time_s.size() * 36);
  for (std::size_t i = 0; i < t.time_s.size(); ++i) {
    out += io::format_g9(t.time_s[i]);
    out += ',';
    out += io::format_g9(t.y_true[i]);
    out += ',';
    out += io::format_g9(t.y_pred[i]);
    out += '\n';
  }
  return out;
}

}  // namespace vfe::eval
