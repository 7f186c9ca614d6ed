#include "fender/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fender {

namespace {

using nlohmann::json;

json ntl_to_json(const NtlParams& p) {
  return json{{"d", p.d},
              {"k_ntl", p.k},
              {"w1", {{"shape", {p.d, p.d, p.k}}, {"data", p.w1}}},
              {"w2", {{"shape", {p.k, 2 * p.d}}, {"data", p.w2}}},
              {"b", p.b},
              {"h", p.h}};
}

NtlParams ntl_from_json(const json& j) {
  NtlParams p;
  p.d = j.at("d").get<int>();
  p.k = j.at("k_ntl").get<int>();
  p.w1 = j.at("w1").at("data").get<std::vector<double>>();
  p.w2 = j.at("w2").at("data").get<std::vector<double>>();
  p.b = j.at("b").get<std::vector<double>>();
  p.h = j.at("h").get<std::vector<double>>();
  const std::size_t d = static_cast<std::size_t>(p.d), k = static_cast<std::size_t>(p.k);
  if (p.w1.size() != d * d * k || p.w2.size() != k * 2 * d || p.b.size() != k || p.h.size() != k) {
    throw std::runtime_error("checkpoint: NTL shape mismatch");
  }
  return p;
}

json config_to_json(const TrainConfig& cfg) {
  return json{{"d", cfg.d},
              {"k_ntl", cfg.k_ntl},
              {"learning_rate", cfg.learning_rate},
              {"stage1_lr_scale", cfg.stage1_lr_scale},
              {"epochs", cfg.epochs},
              {"omega_init", cfg.omega_init},
              {"lambda_p", cfg.lambda_p},
              {"lambda_r", cfg.lambda_r},
              {"zero_pairs_per_positive", cfg.zero_pairs_per_positive},
              {"negatives_per_positive", cfg.negatives_per_positive},
              {"minibatch", cfg.minibatch},
              {"seed", cfg.seed},
              {"optimizer", cfg.optimizer == Optimizer::kAdam ? "adam" : "sgd"},
              {"holdout_baskets", cfg.holdout_baskets},
              {"freeze_omega", cfg.freeze_omega}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.d = j.at("d").get<int>();
  cfg.k_ntl = j.at("k_ntl").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.stage1_lr_scale = j.at("stage1_lr_scale").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.omega_init = j.at("omega_init").get<double>();
  cfg.lambda_p = j.at("lambda_p").get<double>();
  cfg.lambda_r = j.at("lambda_r").get<double>();
  cfg.zero_pairs_per_positive = j.at("zero_pairs_per_positive").get<int>();
  cfg.negatives_per_positive = j.at("negatives_per_positive").get<int>();
  cfg.minibatch = j.at("minibatch").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.optimizer = j.at("optimizer").get<std::string>() == "adam" ? Optimizer::kAdam : Optimizer::kSgd;
  cfg.holdout_baskets = j.at("holdout_baskets").get<int>();
  cfg.freeze_omega = j.at("freeze_omega").get<bool>();
  return cfg;
}

json stage1_json(const Stage1Model& m) {
  return json{{"d", m.d},
              {"k_ntl", m.k_ntl},
              {"user_offset", m.user_offset},
              {"user_rows", m.user_rows},
              {"user_emb", m.user_emb},
              {"item_emb", m.item_emb},
              {"ntl", ntl_to_json(m.ntl)},
              {"loss_trace", m.loss_trace}};
}

Stage1Model stage1_from_json(const json& j) {
  Stage1Model m;
  m.d = j.at("d").get<int>();
  m.k_ntl = j.at("k_ntl").get<int>();
  m.user_offset = j.at("user_offset").get<std::vector<std::size_t>>();
  m.user_rows = j.at("user_rows").get<std::vector<int>>();
  m.user_emb = j.at("user_emb").get<std::vector<double>>();
  m.item_emb = j.at("item_emb").get<std::vector<double>>();
  m.ntl = ntl_from_json(j.at("ntl"));
  m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  return m;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  in >> j;
  return j;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << body;
}

}  // namespace

std::string stage1_to_json(const Stage1Model& m) { return stage1_json(m).dump(); }

std::string train_config_to_json(const TrainConfig& cfg) { return config_to_json(cfg).dump(2); }

void save_fender_checkpoint(const Stage2Model& m, const TrainConfig& cfg, const std::string& path) {
  json j{{"model", "fender"},
         {"config", config_to_json(cfg)},
         {"omega", m.omega},
         {"omega_trace", m.omega_trace},
         {"stage1", stage1_json(m.stage1)},
         {"stage2",
          {{"d", m.d},
           {"k_ntl", m.k_ntl},
           {"user_emb", m.user_emb},
           {"item_emb", m.item_emb},
           {"ntl", ntl_to_json(m.ntl)},
           {"loss_trace", m.loss_trace}}}};
  write_file(path, j.dump(2) + "\n");
}

Stage2Model load_fender_checkpoint(const std::string& path, TrainConfig* cfg_out) {
  const json j = load_json_file(path);
  if (j.at("model").get<std::string>() != "fender") {
    throw std::runtime_error(path + ": not a fender checkpoint");
  }
  Stage2Model m;
  m.stage1 = stage1_from_json(j.at("stage1"));
  const json& s2 = j.at("stage2");
  m.d = s2.at("d").get<int>();
  m.k_ntl = s2.at("k_ntl").get<int>();
  m.user_emb = s2.at("user_emb").get<std::vector<double>>();
  m.item_emb = s2.at("item_emb").get<std::vector<double>>();
  m.ntl = ntl_from_json(s2.at("ntl"));
  m.loss_trace = s2.at("loss_trace").get<std::vector<double>>();
  m.omega = j.at("omega").get<double>();
  m.omega_trace = j.at("omega_trace").get<std::vector<double>>();
  if (cfg_out != nullptr) *cfg_out = config_from_json(j.at("config"));
  return m;
}

void save_mf_checkpoint(const MfRanker& m, const TrainConfig& cfg, const std::string& path) {
  json j{{"model", m.name()},
         {"config", config_to_json(cfg)},
         {"d", m.d()},
         {"n_users", m.n_users()},
         {"n_items", m.n_items()},
         {"user_emb", m.user_emb()},
         {"item_emb", m.item_emb()},
         {"loss_trace", m.loss_trace()}};
  write_file(path, j.dump(2) + "\n");
}

MfRanker load_mf_checkpoint(const std::string& path, TrainConfig* cfg_out) {
  const json j = load_json_file(path);
  MfRanker m(j.at("model").get<std::string>(), j.at("d").get<int>(), j.at("n_users").get<int>(),
             j.at("n_items").get<int>());
  m.user_emb() = j.at("user_emb").get<std::vector<double>>();
  m.item_emb() = j.at("item_emb").get<std::vector<double>>();
  m.loss_trace() = j.at("loss_trace").get<std::vector<double>>();
  if (cfg_out != nullptr) *cfg_out = config_from_json(j.at("config"));
  return m;
}

void save_pif_checkpoint(const std::string& path) {
  write_file(path, json{{"model", "pif"}}.dump(2) + "\n");
}

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
  json j{{"latent_dim", gt.latent_dim},
         {"z_user", gt.z_user},
         {"z_item", gt.z_item},
         {"durable", gt.durable},
         {"period", gt.period}};
  write_file(path, j.dump() + "\n");
}

GroundTruth load_ground_truth(const std::string& path) {
  const json j = load_json_file(path);
  GroundTruth gt;
  gt.latent_dim = j.at("latent_dim").get<int>();
  gt.z_user = j.at("z_user").get<std::vector<double>>();
  gt.z_item = j.at("z_item").get<std::vector<double>>();
  gt.durable = j.at("durable").get<std::vector<std::uint8_t>>();
  gt.period = j.at("period").get<std::vector<int>>();
  return gt;
}

}  // namespace fender
