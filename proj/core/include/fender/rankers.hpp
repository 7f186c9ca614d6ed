#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fender/models.hpp"
#include "fender/pif.hpp"

namespace fender {

// Uniform scoring surface for the evaluation harness. score(u, t, i) rates
// item i for user u's basket t (1-based). Implementations are immutable and
// safe for concurrent scoring.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual double score(int u, int t, int i) const = 0;
  virtual int n_items() const = 0;
  virtual std::string name() const = 0;
};

// Top-k over the full vocabulary, descending score, ties by ascending item
// id. Returns exactly min(k, n_items) items; never filters repeats.
std::vector<int> recommend(const Ranker& r, int u, int t, int k);

// Eq-style frequency baseline: score = PIF(u, i, t).
class PifRanker final : public Ranker {
 public:
  explicit PifRanker(PifIndex idx) : idx_(std::move(idx)) {}
  double score(int u, int t, int i) const override;
  int n_items() const override { return idx_.n_items; }
  std::string name() const override { return "pif"; }
  const PifIndex& index() const { return idx_; }

 private:
  PifIndex idx_;
};

PifRanker pif_ranker(const PifIndex& idx);

// Inner-product matrix factorization; covers both the plain BPR-MF baseline
// and its inverse-propensity-weighted variant (they differ only in training).
class MfRanker final : public Ranker {
 public:
  MfRanker(std::string name, int d, int n_users, int n_items);
  double score(int u, int t, int i) const override;  // ignores t
  int n_items() const override { return n_items_; }
  std::string name() const override { return name_; }

  int d() const { return d_; }
  int n_users() const { return n_users_; }
  std::vector<double>& user_emb() { return user_emb_; }
  std::vector<double>& item_emb() { return item_emb_; }
  const std::vector<double>& user_emb() const { return user_emb_; }
  const std::vector<double>& item_emb() const { return item_emb_; }
  std::vector<double>& loss_trace() { return loss_trace_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

 private:
  std::string name_;
  int d_ = 0, n_users_ = 0, n_items_ = 0;
  std::vector<double> user_emb_, item_emb_;  // flat, row-major
  std::vector<double> loss_trace_;
};

MfRanker train_bprmf(const BasketDataset& ds, const TrainConfig& cfg);

// BPR-MF with each positive term weighted by the clipped inverse of its PIF.
MfRanker train_propensity_mf(const BasketDataset& ds, const PifIndex& idx, const TrainConfig& cfg);

// Inverse-propensity weight 1 / max(pif_value, eps), clipped at cap.
double ips_weight(double pif_value, double eps_prop = 0.05, double cap = 20.0);

// Two-stage model. Holds its own copy of the trained stages; an omega
// override switches the recommendation style at inference time.
class FenderRanker final : public Ranker {
 public:
  explicit FenderRanker(Stage2Model model, std::optional<double> omega_override = std::nullopt)
      : model_(std::move(model)), omega_override_(omega_override) {}
  // For t beyond the trained horizon the last reconstruction embedding is
  // reused (the confounder side is time-invariant anyway).
  double score(int u, int t, int i) const override;
  int n_items() const override;
  std::string name() const override { return "fender"; }
  const Stage2Model& model() const { return model_; }
  std::optional<double> omega_override() const { return omega_override_; }

 private:
  Stage2Model model_;
  std::optional<double> omega_override_;
};

}  // namespace fender
