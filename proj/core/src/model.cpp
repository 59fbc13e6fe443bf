#include "vfe/model.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "vfe/error.hpp"
#include "vfe/io.hpp"

namespace vfe::model {

using features::FeatureMatrix;
using nlohmann::json;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

Eigen::Map<const RowMajorMatrix> as_matrix(const FeatureMatrix& x) {
  return {x.values.data(), static_cast<Eigen::Index>(x.n_samples), static_cast<Eigen::Index>(x.n_columns())};
}

RowMajorMatrix standardized(const FeatureMatrix& x, const StandardizationStats& stats) {
  RowMajorMatrix m = as_matrix(x);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const auto uc = static_cast<std::size_t>(c);
    m.col(c) = (m.col(c).array() - stats.means[uc]) / stats.stds[uc];
  }
  return m;
}

}  // namespace

StandardizationStats StandardizationStats::compute(const FeatureMatrix& x) {
  const auto m = as_matrix(x);
  StandardizationStats s;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mean = m.col(c).mean();
    const double var = (m.col(c).array() - mean).square().mean();
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      throw Error(Errc::DegenerateColumn,
                  fmt::format("column '{}' has zero variance", x.column_names[static_cast<std::size_t>(c)]));
    }
    s.means.push_back(mean);
    s.stds.push_back(sd);
  }
  return s;
}

ForceModel ridge_fit(const FeatureMatrix& x, double lambda) {
  x.check();
  if (!x.has_target()) throw Error(Errc::SchemaViolation, "ridge_fit needs a target for every row");
  if (!(lambda >= 0.0)) throw Error(Errc::InvalidSpec, fmt::format("ridge lambda {} must be >= 0", lambda));
  if (x.n_samples <= x.n_columns()) {
    throw Error(Errc::SingularSystem,
                fmt::format("{} rows cannot determine {} coefficients", x.n_samples, x.n_columns()));
  }

  ForceModel model;
  model.kind = x.kind;
  model.lambda = lambda;
  model.column_names = x.column_names;

  RowMajorMatrix design;
  if (x.kind == ModelKind::Absolute) {
    model.standardization = StandardizationStats::compute(x);
    design = standardized(x, *model.standardization);
  } else {
    design = as_matrix(x);
  }
  const Eigen::Map<const Eigen::VectorXd> y(x.target.data(), static_cast<Eigen::Index>(x.n_samples));

  const Eigen::RowVectorXd col_means = design.colwise().mean();
  const double y_mean = y.mean();
  const RowMajorMatrix centered = design.rowwise() - col_means;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = centered.transpose() * centered;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = centered.transpose() * yc;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const auto d = ldlt.vectorD();
  const double d_max = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-12 * d_max)) {
    throw Error(Errc::SingularSystem, fmt::format("normal equations are singular (lambda = {})", lambda));
  }
  const Eigen::VectorXd w = ldlt.solve(rhs);

  model.weights.assign(w.data(), w.data() + w.size());
  model.intercept = y_mean - col_means.dot(w);
  return model;
}

std::vector<double> predict(const ForceModel& model, const FeatureMatrix& x) {
  if (x.column_names != model.column_names) {
    throw Error(Errc::SchemaMismatch,
                fmt::format("model expects columns [{}] but got [{}]", fmt::join(model.column_names, ","),
                            fmt::join(x.column_names, ",")));
  }
  std::vector<double> out(x.n_samples);
  const std::size_t p = x.n_columns();
  for (std::size_t r = 0; r < x.n_samples; ++r) {
    double acc = model.intercept;
    for (std::size_t c = 0; c < p; ++c) {
      double v = x.at(r, c);
      if (model.standardization) v = (v - model.standardization->means[c]) / model.standardization->stds[c];
      acc += model.weights[c] * v;
    }
    out[r] = acc;
  }
  return out;
}

std::string to_json(const ForceModel& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["kind"] = std::string(to_string(m.kind));
  j["lambda"] = m.lambda;
  j["column_names"] = m.column_names;
  j["weights"] = m.weights;
  j["intercept"] = m.intercept;
  if (m.standardization) {
    j["standardization"] = {{"means", m.standardization->means}, {"stds", m.standardization->stds}};
  } else {
    j["standardization"] = nullptr;
  }
  j["pipeline_config_hash"] = m.pipeline_config_hash;
  return j.dump(2) + "\n";
}

ForceModel from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, fmt::format("model file is not valid JSON: {}", e.what()));
  }
  ForceModel m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kModelSchemaVersion) {
      throw Error(Errc::SchemaVersionMismatch, fmt::format("model schema_version {} is not supported (expected {})",
                                                           m.schema_version, kModelSchemaVersion));
    }
    const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw Error(Errc::CorruptFile, "unknown model kind");
    m.kind = *kind;
    m.lambda = j.at("lambda").get<double>();
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    const auto& st = j.at("standardization");
    if (!st.is_null()) {
      m.standardization = StandardizationStats{st.at("means").get<std::vector<double>>(),
                                               st.at("stds").get<std::vector<double>>()};
    }
    m.pipeline_config_hash = j.at("pipeline_config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, fmt::format("model file: {}", e.what()));
  }

  if (m.weights.size() != m.column_names.size()) {
    throw Error(Errc::CorruptFile, "weights and column_names differ in length");
  }
  if ((m.kind == ModelKind::Absolute) != m.standardization.has_value()) {
    throw Error(Errc::CorruptFile, "absolute models carry standardization, relative models do not");
  }
  if (m.standardization && (m.standardization->means.size() != m.weights.size() ||
                            m.standardization->stds.size() != m.weights.size())) {
    throw Error(Errc::CorruptFile, "standardization statistics differ in length from weights");
  }
  return m;
}

void save_model(const ForceModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_json(model));
}

ForceModel load_model(const std::filesystem::path& path) {
  return from_json(io::read_file(path));
}

}  // namespace vfe::model
