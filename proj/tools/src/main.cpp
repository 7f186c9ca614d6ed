#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"

namespace {

using fender::cli::CliOverrides;
using fender::cli::RunConfig;

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON run configuration");
  cmd->add_option("--seed", ov.seed, "Run seed (overrides config and FENDER_SEED)");
  cmd->add_option("--out", ov.out, "Output directory");
  cmd->add_option("--k", ov.k, "Ranking cutoff");
  cmd->add_option("--omega", ov.omega, "Inference mixing weight: a number or 'trained'");
  cmd->add_option("--models", ov.models, "Comma-separated list: pif,bprmf,ipsmf,fender");
  cmd->add_option("--dataset", ov.dataset, "Dataset CSV (user_id,basket_seq,item_id)");
  cmd->add_option("--min-baskets", ov.min_baskets, "Drop users with <= this many baskets");
  cmd->add_option("--epochs", ov.epochs, "Training epochs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FENDER next-basket recommendation toolkit"};
  app.require_subcommand(1);

  std::map<std::string, std::function<int(const RunConfig&)>> dispatch = {
      {"gen", fender::cli::cmd_gen},         {"pilot", fender::cli::cmd_pilot},
      {"train", fender::cli::cmd_train},     {"eval", fender::cli::cmd_eval},
      {"robust", fender::cli::cmd_robust},   {"casestudy", fender::cli::cmd_casestudy},
      {"loop", fender::cli::cmd_loop}};

  std::map<std::string, CliOverrides> overrides;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic confounded dataset");
  add_common_options(gen, overrides["gen"]);
  CLI::App* pilot = app.add_subcommand("pilot", "Repeat-percentage curves (truth vs model)");
  add_common_options(pilot, overrides["pilot"]);
  CLI::App* train = app.add_subcommand("train", "Train models and write checkpoints");
  add_common_options(train, overrides["train"]);
  CLI::App* eval = app.add_subcommand("eval", "Evaluate checkpoints on the test baskets");
  add_common_options(eval, overrides["eval"]);
  CLI::App* robust = app.add_subcommand("robust", "Noise-insertion robustness experiment");
  add_common_options(robust, overrides["robust"]);
  CLI::App* casestudy = app.add_subcommand("casestudy", "Per-user top-10 lists over future baskets");
  add_common_options(casestudy, overrides["casestudy"]);
  casestudy->add_option("--user", overrides["casestudy"].user, "Dense user id");
  casestudy->add_option("--horizon", overrides["casestudy"].horizon, "Predicted baskets");
  CLI::App* loop = app.add_subcommand("loop", "Recommender-user feedback loop simulation");
  add_common_options(loop, overrides["loop"]);
  loop->add_option("--rounds", overrides["loop"].rounds, "Simulation rounds");
  loop->add_option("--beta", overrides["loop"].beta, "Exposure logit boost");
  loop->add_option("--k-expose", overrides["loop"].k_expose, "Items exposed per round");

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const RunConfig rc = fender::cli::resolve_config(overrides[name]);
    return dispatch[name](rc);
  } catch (const std::exception& e) {
    std::cerr << "fender " << name << ": " << e.what() << "\n";
    return 1;
  }
}
