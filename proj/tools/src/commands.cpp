#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>

#include "fender/checkpoint.hpp"
#include "fender/evaluate.hpp"
#include "fender/pif.hpp"

namespace fender::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

fs::path prepare_out(const RunConfig& rc) {
  fs::path out(rc.out);
  fs::create_directories(out);
  write_file(out / "run_config.json", run_config_to_json(rc));
  return out;
}

BasketDataset acquire_dataset(const RunConfig& rc) {
  if (!rc.synthetic()) return load_dataset(rc.dataset_path, rc.min_baskets);
  return generate(rc.synth).first;
}

void check_known_models(const std::vector<std::string>& models) {
  for (const auto& m : models) {
    if (m != "pif" && m != "bprmf" && m != "ipsmf" && m != "fender") {
      throw std::runtime_error("unknown model '" + m + "' (expected pif|bprmf|ipsmf|fender)");
    }
  }
}

// Trains one model in-process; pif needs no training.
std::unique_ptr<Ranker> build_trained(const std::string& model, const BasketDataset& ds,
                                      const TrainConfig& cfg,
                                      std::optional<double> omega_override) {
  const PifIndex idx = build_pif_index(ds);
  if (model == "pif") return std::make_unique<PifRanker>(pif_ranker(idx));
  if (model == "bprmf") return std::make_unique<MfRanker>(train_bprmf(ds, cfg));
  if (model == "ipsmf") return std::make_unique<MfRanker>(train_propensity_mf(ds, idx, cfg));
  if (model == "fender") {
    Stage1Model s1 = train_stage1(ds, idx, cfg);
    Stage2Model s2 = train_stage2(ds, s1, cfg);
    return std::make_unique<FenderRanker>(std::move(s2), omega_override);
  }
  throw std::runtime_error("unknown model '" + model + "'");
}

std::string loss_csv(const std::vector<double>& trace) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    out += std::to_string(e) + ',' + fmt_double(trace[e]) + '\n';
  }
  return out;
}

}  // namespace

int cmd_gen(const RunConfig& rc) {
  if (!rc.synthetic()) throw std::runtime_error("gen: requires a synth block, not a dataset path");
  const fs::path out = prepare_out(rc);
  auto [ds, gt] = generate(rc.synth);
  save_dataset_csv(ds, (out / "dataset.csv").string());
  save_ground_truth(gt, (out / "ground_truth.json").string());
  std::cout << "gen: wrote " << (out / "dataset.csv").string() << " (" << ds.meta.n_users
            << " users, " << ds.meta.n_items << " items, " << ds.meta.n_baskets << " baskets)\n";
  return 0;
}

int cmd_pilot(const RunConfig& rc) {
  const fs::path out = prepare_out(rc);
  const BasketDataset ds = acquire_dataset(rc);
  check_known_models(rc.models);
  const std::string model = rc.models.front();
  const std::unique_ptr<Ranker> ranker = build_trained(model, ds, rc.train, rc.omega_override);

  const std::vector<double> truth = repeat_percentage(ds);
  const std::vector<double> predicted = repeat_percentage(
      ds, [&](int u, int t, int want) { return recommend(*ranker, u, t, want); });

  std::string csv = "basket_index,truth_pct,model_pct\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    csv += std::to_string(i + 1) + ',' + fmt_double(truth[i]) + ',' + fmt_double(predicted[i]) + '\n';
  }
  write_file(out / "pilot_curve.csv", csv);
  std::cout << "pilot: wrote " << (out / "pilot_curve.csv").string() << " (" << truth.size()
            << " basket indices, model=" << model << ")\n";
  return 0;
}

int cmd_train(const RunConfig& rc) {
  const fs::path out = prepare_out(rc);
  const BasketDataset ds = acquire_dataset(rc);
  check_known_models(rc.models);

  for (const std::string& model : rc.models) {
    const fs::path ckpt = out / (model + ".checkpoint.json");
    if (model == "pif") {
      save_pif_checkpoint(ckpt.string());
    } else if (model == "bprmf") {
      const MfRanker m = train_bprmf(ds, rc.train);
      save_mf_checkpoint(m, rc.train, ckpt.string());
      write_file(out / "bprmf.loss.csv", loss_csv(m.loss_trace()));
    } else if (model == "ipsmf") {
      const PifIndex idx = build_pif_index(ds);
      const MfRanker m = train_propensity_mf(ds, idx, rc.train);
      save_mf_checkpoint(m, rc.train, ckpt.string());
      write_file(out / "ipsmf.loss.csv", loss_csv(m.loss_trace()));
    } else {
      const PifIndex idx = build_pif_index(ds);
      const Stage1Model s1 = train_stage1(ds, idx, rc.train);
      const Stage2Model s2 = train_stage2(ds, s1, rc.train);
      save_fender_checkpoint(s2, rc.train, ckpt.string());
      std::string trace = "epoch,omega\n";
      for (std::size_t e = 0; e < s2.omega_trace.size(); ++e) {
        trace += std::to_string(e) + ',' + fmt_double(s2.omega_trace[e]) + '\n';
      }
      write_file(out / "omega_trace.csv", trace);
      write_file(out / "fender.stage1_loss.csv", loss_csv(s1.loss_trace));
      write_file(out / "fender.stage2_loss.csv", loss_csv(s2.loss_trace));
    }
    std::cout << "train: wrote " << ckpt.string() << "\n";
  }
  return 0;
}

int cmd_eval(const RunConfig& rc) {
  const fs::path out = prepare_out(rc);
  const BasketDataset ds = acquire_dataset(rc);
  check_known_models(rc.models);

  EvalReport report;
  std::vector<std::unique_ptr<Ranker>> owned;
  for (const std::string& model : rc.models) {
    const fs::path ckpt = out / (model + ".checkpoint.json");
    if (!fs::exists(ckpt)) {
      throw std::runtime_error("eval: missing checkpoint for model '" + model + "' at " + ckpt.string());
    }
    if (model == "pif") {
      owned.push_back(std::make_unique<PifRanker>(pif_ranker(build_pif_index(ds))));
    } else if (model == "bprmf" || model == "ipsmf") {
      owned.push_back(std::make_unique<MfRanker>(load_mf_checkpoint(ckpt.string())));
    } else {
      Stage2Model m = load_fender_checkpoint(ckpt.string());
      report.curves["fender.omega_trace"] = m.omega_trace;
      owned.push_back(std::make_unique<FenderRanker>(std::move(m), rc.omega_override));
    }
  }
  std::vector<const Ranker*> models;
  models.reserve(owned.size());
  for (const auto& r : owned) models.push_back(r.get());

  EvalReport computed = evaluate_models(models, ds, rc.k, rc.ntfr_scope);
  computed.curves = std::move(report.curves);
  write_file(out / "report.csv", eval_report_to_csv(computed));
  write_file(out / "report.json", eval_report_to_json(computed));
  std::cout << "eval: wrote " << (out / "report.csv").string() << " (" << computed.rows.size()
            << " models, " << (computed.rows.empty() ? 0 : computed.rows.front().n_users)
            << " users)\n";
  return 0;
}

int cmd_robust(const RunConfig& rc) {
  const fs::path out = prepare_out(rc);
  const BasketDataset ds = acquire_dataset(rc);
  check_known_models(rc.models);

  auto [noised, inserted] = insert_noise_item(ds, rc.seed);

  std::string csv = "model,avg_inserted_rank\n";
  for (const std::string& model : rc.models) {
    const std::unique_ptr<Ranker> ranker = build_trained(model, noised, rc.train, rc.omega_override);
    const double rank = average_inserted_rank(full_rankings(*ranker, noised), inserted);
    csv += model + ',' + fmt_double(rank) + '\n';
  }
  write_file(out / "robust.csv", csv);
  std::cout << "robust: wrote " << (out / "robust.csv").string() << " (" << rc.models.size()
            << " models)\n";
  return 0;
}

int cmd_casestudy(const RunConfig& rc) {
  const fs::path out = prepare_out(rc);
  const BasketDataset ds = acquire_dataset(rc);
  constexpr int kTrainBaskets = 5;
  constexpr int kTop = 10;

  if (rc.user < 0 || rc.user >= ds.n_users()) {
    throw std::runtime_error("casestudy: user " + std::to_string(rc.user) + " not in dataset");
  }
  const int T_user = ds.users[static_cast<std::size_t>(rc.user)].n_baskets();
  if (T_user < rc.horizon + kTrainBaskets) {
    throw std::runtime_error("casestudy: user " + std::to_string(rc.user) + " has only " +
                             std::to_string(T_user) + " baskets, needs >= " +
                             std::to_string(rc.horizon + kTrainBaskets));
  }

  // Both models see exactly the first five baskets of every user; the
  // following baskets are never revealed.
  BasketDataset trunc = ds;
  for (auto& u : trunc.users) {
    if (u.n_baskets() > kTrainBaskets) u.baskets.resize(kTrainBaskets);
  }
  trunc.meta = compute_meta(trunc);

  TrainConfig cfg = rc.train;
  cfg.holdout_baskets = 0;  // no held-out baskets inside the 5-basket window
  const PifIndex idx = build_pif_index(trunc);
  const PifRanker pif_model = pif_ranker(idx);
  const Stage1Model s1 = train_stage1(trunc, idx, cfg);
  const FenderRanker fender_model(train_stage2(trunc, s1, cfg), rc.omega_override);

  const std::vector<std::pair<std::string, const Ranker*>> models = {
      {"pif", &pif_model}, {"fender", &fender_model}};

  std::string csv = "model,step";
  for (int r = 1; r <= kTop; ++r) csv += ",r" + std::to_string(r);
  csv += '\n';
  std::string distinct_csv = "model,distinct_count\n";
  for (const auto& [name, model] : models) {
    std::vector<std::vector<int>> lists;
    for (int step = 1; step <= rc.horizon; ++step) {
      lists.push_back(recommend(*model, rc.user, kTrainBaskets + step, kTop));
      csv += name + ',' + std::to_string(step);
      for (int item : lists.back()) csv += ',' + std::to_string(item);
      csv += '\n';
    }
    distinct_csv += name + ',' + std::to_string(distinct_item_count(lists)) + '\n';
  }
  write_file(out / "casestudy.csv", csv);
  write_file(out / "casestudy_distinct.csv", distinct_csv);
  std::cout << "casestudy: wrote " << (out / "casestudy.csv").string() << " (user " << rc.user
            << ", horizon " << rc.horizon << ")\n";
  return 0;
}

int cmd_loop(const RunConfig& rc) {
  if (!rc.synthetic()) throw std::runtime_error("loop: requires a synth block, not a dataset path");
  const fs::path out = prepare_out(rc);
  check_known_models(rc.models);
  const std::string model = rc.models.front();
  const TrainConfig cfg = rc.train;
  const auto omega = rc.omega_override;
  const RankerFactory factory = [&model, &cfg, &omega](const BasketDataset& ds) {
    return build_trained(model, ds, cfg, omega);
  };

  const std::vector<double> curve = feedback_loop_sim(rc.synth, factory, rc.rounds, rc.beta, rc.k_expose);
  std::string csv = "round,repeat_pct\n";
  for (std::size_t r = 0; r < curve.size(); ++r) {
    csv += std::to_string(r + 1) + ',' + fmt_double(curve[r]) + '\n';
  }
  write_file(out / "loop_curve.csv", csv);
  std::cout << "loop: wrote " << (out / "loop_curve.csv").string() << " (" << curve.size()
            << " rounds, model=" << model << ")\n";
  return 0;
}

}  // namespace fender::cli
