#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fender/metrics.hpp"
#include "fender/models.hpp"
#include "fender/synth.hpp"

namespace fender::cli {

// Resolved run configuration. Precedence: flag > config file > default, with
// the FENDER_SEED environment variable as the lowest-precedence seed source.
struct RunConfig {
  std::string dataset_path;  // empty = generate from the synth block
  SynthConfig synth;
  TrainConfig train;
  int k = 20;
  std::vector<std::string> models = {"pif", "bprmf", "ipsmf", "fender"};
  std::string out = "out";
  std::uint64_t seed = 7;
  std::optional<double> omega_override;  // nullopt = trained omega
  TopFreqScope ntfr_scope = TopFreqScope::kPersonal;
  int min_baskets = 5;

  // command-specific knobs
  int rounds = 5;
  double beta = 2.0;
  int k_expose = 10;
  int user = 0;
  int horizon = 5;

  bool synthetic() const { return dataset_path.empty(); }
};

// Unset optionals mean "not given on the command line".
struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> k;
  std::optional<std::string> omega;   // "trained" or a number
  std::optional<std::string> models;  // comma separated
  std::optional<std::string> dataset;
  std::optional<int> min_baskets;
  std::optional<int> rounds;
  std::optional<double> beta;
  std::optional<int> k_expose;
  std::optional<int> user;
  std::optional<int> horizon;
  std::optional<int> epochs;
};

RunConfig resolve_config(const CliOverrides& cli);

// Serialized resolved config, stamped into <out>/run_config.json by every command.
std::string run_config_to_json(const RunConfig& rc);

}  // namespace fender::cli
