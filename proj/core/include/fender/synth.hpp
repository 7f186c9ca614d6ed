#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "fender/dataset.hpp"
#include "fender/rankers.hpp"

namespace fender {

// Generative process: latent user/item traits drive both historical purchase
// frequency and the next purchase, which is exactly what makes the frequency
// feature confounded. Perishables get a frequency boost on top of the latent
// affinity; durables are blocked for `period` baskets after each purchase.
struct SynthConfig {
  int n_users = 200;
  int n_items = 300;
  int baskets_per_user = 10;
  int latent_dim = 2;
  double perishable_frac = 0.7;
  double basket_size_mean = 8.5;  // Poisson mean, clipped to [1, n_items]
  double pif_effect = 1.0;        // alpha_1: weight of PIF in the purchase logit
  int tau_min = 3;                // durable replenishment period range
  int tau_max = 6;
  std::uint64_t seed = 7;
};

struct GroundTruth {
  int latent_dim = 0;
  std::vector<double> z_user;    // n_users x latent_dim, row-major
  std::vector<double> z_item;    // n_items x latent_dim
  std::vector<std::uint8_t> durable;  // 1 = durable, 0 = perishable
  std::vector<int> period;            // tau_i; 0 for perishables

  double affinity_logit(int u, int i) const;  // z_u . z_i
};

// Purchase logit for one (user, item) at basket t: affinity + alpha_1 * PIF,
// where pif_value is 0 for t = 1. Durable gating happens outside this formula.
inline double propensity_logit(double affinity_logit, double pif_value, double pif_effect) {
  return affinity_logit + pif_effect * pif_value;
}

std::pair<BasketDataset, GroundTruth> generate(const SynthConfig& cfg);

using RankerFactory = std::function<std::unique_ptr<Ranker>(const BasketDataset&)>;

// Closes the exposure loop: each round trains a ranker on the history so
// far, boosts the logits of each user's top-k_expose items by
// exposure_boost, samples the next basket, and records the fraction of the
// new basket already seen in that user's history. Returns one value per round.
std::vector<double> feedback_loop_sim(const SynthConfig& cfg, const RankerFactory& make_ranker,
                                      int rounds, double exposure_boost, int k_expose);

}  // namespace fender
