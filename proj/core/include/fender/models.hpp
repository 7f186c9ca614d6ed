#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fender/dataset.hpp"
#include "fender/ntl.hpp"
#include "fender/optim.hpp"
#include "fender/pif.hpp"

namespace fender {

struct TrainConfig {
  int d = 8;       // embedding dimension
  int k_ntl = 2;   // tensor slices
  double learning_rate = 0.0001;
  // Stage 1 trains at learning_rate * this. 1.0 runs the published rate; the
  // small-table convergence check uses a hotter frozen schedule (see tests).
  double stage1_lr_scale = 1.0;
  int epochs = 100;
  double omega_init = 0.1;
  double lambda_p = 1e-6;  // stage-1 weight decay
  double lambda_r = 1e-6;  // stage-2 weight decay
  int zero_pairs_per_positive = 3;  // rho: zero-PIF samples per positive in stage 1
  int negatives_per_positive = 4;   // m: BPR negatives per positive
  int minibatch = 256;
  std::uint64_t seed = 7;
  Optimizer optimizer = Optimizer::kAdam;
  // BPR-style trainers draw positives from baskets t <= T_u - holdout_baskets;
  // 2 keeps the validation and test baskets out of training.
  int holdout_baskets = 2;
  bool freeze_omega = false;
};

// Stage 1: time-indexed user embeddings e^p_{u,t} (t = 2..T_u), time-invariant
// item embeddings, and the NTL that reconstructs PIF from them.
struct Stage1Model {
  int d = 0, k_ntl = 0;
  std::vector<std::size_t> user_offset;  // start of user u's rows in user_emb
  std::vector<int> user_rows;            // T_u - 1 rows, for t = 2..T_u
  std::vector<double> user_emb;          // flat rows of length d
  std::vector<double> item_emb;          // n_items x d
  NtlParams ntl;
  std::vector<double> loss_trace;        // per-epoch mean squared error

  int n_users() const { return static_cast<int>(user_rows.size()); }
  int n_items() const { return static_cast<int>(item_emb.size()) / (d > 0 ? d : 1); }
  int max_t(int u) const { return user_rows[static_cast<std::size_t>(u)] + 1; }
  std::span<const double> user_vec(int u, int t) const;  // throws if t untrained
  std::span<const double> item_vec(int i) const;
};

// Stage 2 keeps stage 1 frozen and adds the confounder side plus the mixing
// weight omega (unconstrained; training may push it past 1).
struct Stage2Model {
  Stage1Model stage1;
  int d = 0, k_ntl = 0;
  std::vector<double> user_emb;  // n_users x d, time-invariant
  std::vector<double> item_emb;  // n_items x d
  NtlParams ntl;
  double omega = 0.1;
  std::vector<double> omega_trace;  // omega at the start of each epoch
  std::vector<double> loss_trace;   // per-epoch mean BPR term

  std::span<const double> user_vec(int u) const;
  std::span<const double> item_vec(int i) const;
};

struct PifSample {
  int u;
  int t;
  int item;
  double target;
};

// The positive-PIF triples (2 <= t <= T_u) stage 1 regresses on; with a zero
// pair ratio of 0 these are the only samples visited.
std::vector<PifSample> stage1_positive_samples(const BasketDataset& ds, const PifIndex& idx);

// Minimizes mean squared error between the NTL output and PIF(u,i,t) over all
// positive-PIF triples (2 <= t <= T_u) plus zero_pairs_per_positive sampled
// zero-PIF triples per positive, resampled each epoch.
Stage1Model train_stage1(const BasketDataset& ds, const PifIndex& idx, const TrainConfig& cfg);

// BPR over (positive, negative) item pairs per training basket; trains the
// confounder embeddings, their NTL and omega. Stage-1 parameters are frozen.
Stage2Model train_stage2(const BasketDataset& ds, const Stage1Model& stage1,
                         const TrainConfig& cfg);

// PIF-reconstruction score p(u,t,i) from the frozen first stage.
double stage1_score(const Stage1Model& m, int u, int t, int i);

// Confounder score c(u,i) from the second stage.
double stage2_confounder_score(const Stage2Model& m, int u, int i);

// omega * c + (1 - omega) * p with the trained omega.
double fender_score(const Stage2Model& m, int u, int t, int i);
// Same with a caller-supplied omega (inference-time style control).
double fender_score(const Stage2Model& m, int u, int t, int i, double omega);

}  // namespace fender
