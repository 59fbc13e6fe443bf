#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace vfe::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitPipeline = 4;
inline constexpr int kExitModelSchema = 5;

// Flags shared by the pipeline commands; set values override the config file.
struct ConfigFlags {
  std::optional<std::filesystem::path> config_path;
  std::optional<std::string> kind;
  std::optional<double> lambda;
};

struct SimulateArgs {
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir;
  std::optional<std::size_t> n_sessions;
  std::optional<unsigned long long> seed;
};

struct ProfileArgs {
  ConfigFlags config;
  std::filesystem::path corpus_dir;
  std::filesystem::path model_out;
};

struct EvaluateArgs {
  ConfigFlags config;
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;
  bool traces = false;
};

struct PredictArgs {
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path session_dir;
  std::filesystem::path model_path;
  std::filesystem::path out_csv;
  bool align_with_force = false;
};

struct InspectArgs {
  ConfigFlags config;
  std::filesystem::path session_dir;
  std::string stage;
  std::filesystem::path out_dir;
};

int cmd_simulate(const SimulateArgs& args);
int cmd_profile(const ProfileArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_predict(const PredictArgs& args);
int cmd_inspect(const InspectArgs& args);

}  // namespace vfe::cli
