#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_config_flags(CLI::App* cmd, vfe::cli::ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Pipeline configuration JSON")->check(CLI::ExistingFile);
  cmd->add_option("--kind", flags.kind, "Model kind")->check(CLI::IsMember({"absolute", "relative"}));
  cmd->add_option("--lambda", flags.lambda, "Ridge penalty")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vfe::cli;

  CLI::App app{"Vibrometric force estimation toolkit", "vfe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vfe 0.1.0");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic session corpus");
  simulate->add_option("--config", sim.config_path, "Corpus options JSON")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out_dir, "Output corpus directory")->required();
  simulate->add_option("--n", sim.n_sessions, "Number of sessions")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Base seed");

  ProfileArgs prof;
  auto* profile = app.add_subcommand("profile", "Train a force model on a corpus");
  add_config_flags(profile, prof.config);
  profile->add_option("--corpus", prof.corpus_dir, "Corpus directory")->required();
  profile->add_option("--out", prof.model_out, "Model output path")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Hold-one-out evaluation over a corpus");
  add_config_flags(evaluate, ev.config);
  evaluate->add_option("--corpus", ev.corpus_dir, "Corpus directory")->required();
  evaluate->add_option("--out", ev.out_dir, "Report directory")->required();
  evaluate->add_flag("--traces", ev.traces, "Also write per-fold prediction traces");

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "Estimate force for one session");
  predict->add_option("--config", pred.config_path, "Pipeline configuration JSON")->check(CLI::ExistingFile);
  predict->add_option("--session", pred.session_dir, "Session directory")->required();
  predict->add_option("--model", pred.model_path, "Trained model file")->required();
  predict->add_option("--out", pred.out_csv, "Prediction CSV")->required();
  predict->add_flag("--align-with-force", pred.align_with_force, "Align against the session's force.csv");

  InspectArgs insp;
  auto* inspect = app.add_subcommand("inspect", "Dump intermediate pipeline stages");
  add_config_flags(inspect, insp.config);
  inspect->add_option("--session", insp.session_dir, "Session directory")->required();
  inspect->add_option("--stage", insp.stage, "filtered, envelope, aligned, repaired or features")->required();
  inspect->add_option("--out", insp.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (*simulate) return cmd_simulate(sim);
  if (*profile) return cmd_profile(prof);
  if (*evaluate) return cmd_evaluate(ev);
  if (*predict) return cmd_predict(pred);
  return cmd_inspect(insp);
}
