#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vfe/features.hpp"

namespace vfe::model {

inline constexpr int kModelSchemaVersion = 1;
inline constexpr double kDefaultLambda = 1.0;

// Per-column z-score statistics (population standard deviation).
struct StandardizationStats {
  std::vector<double> means;
  std::vector<double> stds;

  // Throws Error(DegenerateColumn) for a zero-variance column.
  static StandardizationStats compute(const features::FeatureMatrix& x);

  bool operator==(const StandardizationStats&) const = default;
};

struct ForceModel {
  ModelKind kind = ModelKind::Absolute;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = kDefaultLambda;
  // Present for absolute models only.
  std::optional<StandardizationStats> standardization;
  std::vector<std::string> column_names;
  std::string pipeline_config_hash;
  int schema_version = kModelSchemaVersion;

  bool operator==(const ForceModel&) const = default;
};

// Minimizes |y - Xw - b|^2 + lambda |w|^2 with an unpenalized intercept.
// Absolute matrices are z-scored first and the statistics kept on the model.
ForceModel ridge_fit(const features::FeatureMatrix& x, double lambda);

// Throws Error(SchemaMismatch) when the columns differ from the model's.
std::vector<double> predict(const ForceModel& model, const features::FeatureMatrix& x);

std::string to_json(const ForceModel& model);
ForceModel from_json(std::string_view text);

void save_model(const ForceModel& model, const std::filesystem::path& path);
ForceModel load_model(const std::filesystem::path& path);

}  // namespace vfe::model
