#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fender::cli {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

void apply_synth_json(const json& j, SynthConfig& s) {
  if (j.contains("n_users")) s.n_users = j["n_users"].get<int>();
  if (j.contains("n_items")) s.n_items = j["n_items"].get<int>();
  if (j.contains("baskets_per_user")) s.baskets_per_user = j["baskets_per_user"].get<int>();
  if (j.contains("latent_dim")) s.latent_dim = j["latent_dim"].get<int>();
  if (j.contains("perishable_frac")) s.perishable_frac = j["perishable_frac"].get<double>();
  if (j.contains("basket_size_mean")) s.basket_size_mean = j["basket_size_mean"].get<double>();
  if (j.contains("pif_effect")) s.pif_effect = j["pif_effect"].get<double>();
  if (j.contains("tau_min")) s.tau_min = j["tau_min"].get<int>();
  if (j.contains("tau_max")) s.tau_max = j["tau_max"].get<int>();
}

void apply_train_json(const json& j, TrainConfig& t) {
  if (j.contains("d")) t.d = j["d"].get<int>();
  if (j.contains("k_ntl")) t.k_ntl = j["k_ntl"].get<int>();
  if (j.contains("learning_rate")) t.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("stage1_lr_scale")) t.stage1_lr_scale = j["stage1_lr_scale"].get<double>();
  if (j.contains("epochs")) t.epochs = j["epochs"].get<int>();
  if (j.contains("omega_init")) t.omega_init = j["omega_init"].get<double>();
  if (j.contains("lambda_p")) t.lambda_p = j["lambda_p"].get<double>();
  if (j.contains("lambda_r")) t.lambda_r = j["lambda_r"].get<double>();
  if (j.contains("zero_pairs_per_positive"))
    t.zero_pairs_per_positive = j["zero_pairs_per_positive"].get<int>();
  if (j.contains("negatives_per_positive"))
    t.negatives_per_positive = j["negatives_per_positive"].get<int>();
  if (j.contains("minibatch")) t.minibatch = j["minibatch"].get<int>();
  if (j.contains("optimizer")) {
    const std::string mode = j["optimizer"].get<std::string>();
    if (mode != "sgd" && mode != "adam") throw std::runtime_error("config: unknown optimizer " + mode);
    t.optimizer = mode == "adam" ? Optimizer::kAdam : Optimizer::kSgd;
  }
}

std::optional<double> parse_omega(const std::string& s) {
  if (s == "trained") return std::nullopt;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("--omega expects a number or 'trained', got " + s);
  return v;
}

}  // namespace

RunConfig resolve_config(const CliOverrides& cli) {
  RunConfig rc;

  // lowest precedence: environment seed
  if (const char* env = std::getenv("FENDER_SEED")) {
    rc.seed = std::strtoull(env, nullptr, 10);
  }

  bool config_has_synth_seed = false;
  bool config_has_train_seed = false;
  if (cli.config_path) {
    std::ifstream in(*cli.config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + *cli.config_path);
    json j;
    in >> j;
    if (j.contains("dataset") && j.contains("synth")) {
      throw std::runtime_error("config: give either 'dataset' or 'synth', not both");
    }
    if (j.contains("dataset")) rc.dataset_path = j["dataset"].get<std::string>();
    if (j.contains("synth")) {
      apply_synth_json(j["synth"], rc.synth);
      if (j["synth"].contains("seed")) {
        rc.synth.seed = j["synth"]["seed"].get<std::uint64_t>();
        config_has_synth_seed = true;
      }
    }
    if (j.contains("train")) {
      apply_train_json(j["train"], rc.train);
      if (j["train"].contains("seed")) {
        rc.train.seed = j["train"]["seed"].get<std::uint64_t>();
        config_has_train_seed = true;
      }
    }
    if (j.contains("k")) rc.k = j["k"].get<int>();
    if (j.contains("models")) rc.models = j["models"].get<std::vector<std::string>>();
    if (j.contains("out")) rc.out = j["out"].get<std::string>();
    if (j.contains("seed")) rc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("omega")) {
      if (j["omega"].is_string()) {
        rc.omega_override = parse_omega(j["omega"].get<std::string>());
      } else {
        rc.omega_override = j["omega"].get<double>();
      }
    }
    if (j.contains("ntfr_scope")) {
      const std::string scope = j["ntfr_scope"].get<std::string>();
      if (scope != "personal" && scope != "global") {
        throw std::runtime_error("config: ntfr_scope must be 'personal' or 'global'");
      }
      rc.ntfr_scope = scope == "global" ? TopFreqScope::kGlobal : TopFreqScope::kPersonal;
    }
    if (j.contains("min_baskets")) rc.min_baskets = j["min_baskets"].get<int>();
    if (j.contains("rounds")) rc.rounds = j["rounds"].get<int>();
    if (j.contains("beta")) rc.beta = j["beta"].get<double>();
    if (j.contains("k_expose")) rc.k_expose = j["k_expose"].get<int>();
    if (j.contains("user")) rc.user = j["user"].get<int>();
    if (j.contains("horizon")) rc.horizon = j["horizon"].get<int>();
  }

  // highest precedence: flags
  if (cli.seed) rc.seed = *cli.seed;
  if (cli.out) rc.out = *cli.out;
  if (cli.k) rc.k = *cli.k;
  if (cli.omega) rc.omega_override = parse_omega(*cli.omega);
  if (cli.models) rc.models = split_csv_list(*cli.models);
  if (cli.dataset) rc.dataset_path = *cli.dataset;
  if (cli.min_baskets) rc.min_baskets = *cli.min_baskets;
  if (cli.rounds) rc.rounds = *cli.rounds;
  if (cli.beta) rc.beta = *cli.beta;
  if (cli.k_expose) rc.k_expose = *cli.k_expose;
  if (cli.user) rc.user = *cli.user;
  if (cli.horizon) rc.horizon = *cli.horizon;
  if (cli.epochs) rc.train.epochs = *cli.epochs;

  // The run seed feeds the generator and trainers unless the config pinned
  // stage seeds explicitly.
  if (!config_has_synth_seed || cli.seed) rc.synth.seed = rc.seed;
  if (!config_has_train_seed || cli.seed) rc.train.seed = rc.seed;

  if (rc.models.empty()) throw std::runtime_error("config: empty model list");
  if (rc.k < 1) throw std::runtime_error("config: k must be >= 1");
  return rc;
}

std::string run_config_to_json(const RunConfig& rc) {
  json j;
  if (rc.synthetic()) {
    j["synth"] = {{"n_users", rc.synth.n_users},
                  {"n_items", rc.synth.n_items},
                  {"baskets_per_user", rc.synth.baskets_per_user},
                  {"latent_dim", rc.synth.latent_dim},
                  {"perishable_frac", rc.synth.perishable_frac},
                  {"basket_size_mean", rc.synth.basket_size_mean},
                  {"pif_effect", rc.synth.pif_effect},
                  {"tau_min", rc.synth.tau_min},
                  {"tau_max", rc.synth.tau_max},
                  {"seed", rc.synth.seed}};
  } else {
    j["dataset"] = rc.dataset_path;
  }
  j["train"] = {{"d", rc.train.d},
                {"k_ntl", rc.train.k_ntl},
                {"learning_rate", rc.train.learning_rate},
                {"stage1_lr_scale", rc.train.stage1_lr_scale},
                {"epochs", rc.train.epochs},
                {"omega_init", rc.train.omega_init},
                {"lambda_p", rc.train.lambda_p},
                {"lambda_r", rc.train.lambda_r},
                {"zero_pairs_per_positive", rc.train.zero_pairs_per_positive},
                {"negatives_per_positive", rc.train.negatives_per_positive},
                {"minibatch", rc.train.minibatch},
                {"optimizer", rc.train.optimizer == Optimizer::kAdam ? "adam" : "sgd"},
                {"seed", rc.train.seed}};
  j["k"] = rc.k;
  j["models"] = rc.models;
  j["out"] = rc.out;
  j["seed"] = rc.seed;
  if (rc.omega_override) {
    j["omega"] = *rc.omega_override;
  } else {
    j["omega"] = "trained";
  }
  j["ntfr_scope"] = rc.ntfr_scope == TopFreqScope::kGlobal ? "global" : "personal";
  j["min_baskets"] = rc.min_baskets;
  j["rounds"] = rc.rounds;
  j["beta"] = rc.beta;
  j["k_expose"] = rc.k_expose;
  j["user"] = rc.user;
  j["horizon"] = rc.horizon;
  return j.dump(2) + "\n";
}

}  // namespace fender::cli
