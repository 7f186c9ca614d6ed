#include "fender/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fender/math.hpp"
#include "fender/rng.hpp"

namespace fender {

namespace {

constexpr std::uint64_t kGenStream = 0x47454e;
constexpr std::uint64_t kLoopStream = 0x4c4f4f50;

struct UserState {
  std::vector<int> count;          // purchases so far
  std::vector<int> last_purchase;  // basket index of most recent purchase, 0 = never
};

// Purchase weights for user u's basket t. Durables sit out for `period`
// baskets after a purchase; everything else follows the confounded logit.
void item_weights(const GroundTruth& gt, const SynthConfig& cfg, const UserState& st, int u,
                  int t, const double* boost_logit, std::vector<double>& w) {
  const int n = static_cast<int>(gt.durable.size());
  w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (gt.durable[static_cast<std::size_t>(i)] != 0) {
      const int last = st.last_purchase[static_cast<std::size_t>(i)];
      if (last > 0 && t - last < gt.period[static_cast<std::size_t>(i)]) {
        w[static_cast<std::size_t>(i)] = 0.0;
        continue;
      }
    }
    const double pif_value =
        t >= 2 ? static_cast<double>(st.count[static_cast<std::size_t>(i)]) / static_cast<double>(t - 1)
               : 0.0;
    double logit = propensity_logit(gt.affinity_logit(u, i), pif_value, cfg.pif_effect);
    if (boost_logit != nullptr) logit += boost_logit[i];
    w[static_cast<std::size_t>(i)] = sigmoid(logit);
  }
}

// Weighted sampling without replacement by repeated inverse-CDF walks.
Basket sample_basket(std::vector<double>& w, int size, std::mt19937_64& g) {
  Basket basket;
  basket.reserve(static_cast<std::size_t>(size));
  for (int draw = 0; draw < size; ++draw) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) break;
    const double r = uniform01(g) * total;
    double acc = 0.0;
    int pick = -1;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      acc += w[static_cast<std::size_t>(i)];
      if (r < acc) {
        pick = i;
        break;
      }
    }
    if (pick < 0) pick = static_cast<int>(w.size()) - 1;  // fp edge of the walk
    basket.push_back(pick);
    w[static_cast<std::size_t>(pick)] = 0.0;
  }
  std::sort(basket.begin(), basket.end());
  return basket;
}

void apply_basket(UserState& st, const Basket& b, int t) {
  for (int i : b) {
    st.count[static_cast<std::size_t>(i)] += 1;
    st.last_purchase[static_cast<std::size_t>(i)] = t;
  }
}

}  // namespace

double GroundTruth::affinity_logit(int u, int i) const {
  const double* zu = z_user.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(latent_dim);
  const double* zi = z_item.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(latent_dim);
  double s = 0.0;
  for (int k = 0; k < latent_dim; ++k) s += zu[k] * zi[k];
  return s;
}

std::pair<BasketDataset, GroundTruth> generate(const SynthConfig& cfg) {
  if (cfg.n_users < 1 || cfg.n_items < 1 || cfg.baskets_per_user < 1 || cfg.latent_dim < 1 ||
      cfg.perishable_frac < 0.0 || cfg.perishable_frac > 1.0 || cfg.basket_size_mean <= 0.0 ||
      cfg.tau_min < 1 || cfg.tau_max < cfg.tau_min) {
    throw std::invalid_argument("generate: invalid config");
  }
  std::mt19937_64 gen(mix_seed(cfg.seed, kGenStream));

  GroundTruth gt;
  gt.latent_dim = cfg.latent_dim;
  const double zscale = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  gt.z_user.resize(static_cast<std::size_t>(cfg.n_users) * static_cast<std::size_t>(cfg.latent_dim));
  gt.z_item.resize(static_cast<std::size_t>(cfg.n_items) * static_cast<std::size_t>(cfg.latent_dim));
  for (auto& z : gt.z_user) z = gaussian(gen) * zscale;
  for (auto& z : gt.z_item) z = gaussian(gen) * zscale;
  gt.durable.resize(static_cast<std::size_t>(cfg.n_items));
  gt.period.assign(static_cast<std::size_t>(cfg.n_items), 0);
  for (int i = 0; i < cfg.n_items; ++i) {
    gt.durable[static_cast<std::size_t>(i)] = uniform01(gen) < cfg.perishable_frac ? 0 : 1;
  }
  for (int i = 0; i < cfg.n_items; ++i) {
    if (gt.durable[static_cast<std::size_t>(i)] != 0) {
      gt.period[static_cast<std::size_t>(i)] = cfg.tau_min + uniform_int(gen, cfg.tau_max - cfg.tau_min + 1);
    }
  }

  BasketDataset ds;
  ds.n_items = cfg.n_items;
  ds.user_orig_ids.resize(static_cast<std::size_t>(cfg.n_users));
  ds.item_orig_ids.resize(static_cast<std::size_t>(cfg.n_items));
  for (int u = 0; u < cfg.n_users; ++u) ds.user_orig_ids[static_cast<std::size_t>(u)] = u;
  for (int i = 0; i < cfg.n_items; ++i) ds.item_orig_ids[static_cast<std::size_t>(i)] = i;

  std::vector<double> w;
  for (int u = 0; u < cfg.n_users; ++u) {
    UserHistory hist;
    hist.user_id = u;
    UserState st;
    st.count.assign(static_cast<std::size_t>(cfg.n_items), 0);
    st.last_purchase.assign(static_cast<std::size_t>(cfg.n_items), 0);
    for (int t = 1; t <= cfg.baskets_per_user; ++t) {
      const int size = std::min(std::max(1, poisson(gen, cfg.basket_size_mean)), cfg.n_items);
      item_weights(gt, cfg, st, u, t, nullptr, w);
      Basket b = sample_basket(w, size, gen);
      apply_basket(st, b, t);
      hist.baskets.push_back(std::move(b));
    }
    ds.users.push_back(std::move(hist));
  }
  ds.meta = compute_meta(ds);
  return {std::move(ds), std::move(gt)};
}

std::vector<double> feedback_loop_sim(const SynthConfig& cfg, const RankerFactory& make_ranker,
                                      int rounds, double exposure_boost, int k_expose) {
  if (rounds < 1 || k_expose < 1) throw std::invalid_argument("feedback_loop_sim: invalid arguments");

  auto [ds, gt] = generate(cfg);
  std::mt19937_64 gen(mix_seed(cfg.seed, kLoopStream));

  // Rebuild per-user purchase state from the generated history.
  std::vector<UserState> state(static_cast<std::size_t>(cfg.n_users));
  for (int u = 0; u < cfg.n_users; ++u) {
    auto& st = state[static_cast<std::size_t>(u)];
    st.count.assign(static_cast<std::size_t>(cfg.n_items), 0);
    st.last_purchase.assign(static_cast<std::size_t>(cfg.n_items), 0);
    const auto& hist = ds.users[static_cast<std::size_t>(u)];
    for (int t = 1; t <= hist.n_baskets(); ++t) apply_basket(st, hist.baskets[static_cast<std::size_t>(t - 1)], t);
  }

  std::vector<double> curve;
  std::vector<double> w;
  std::vector<double> boost(static_cast<std::size_t>(cfg.n_items));
  for (int round = 1; round <= rounds; ++round) {
    const std::unique_ptr<Ranker> ranker = make_ranker(ds);
    const int t_next = ds.users.front().n_baskets() + 1;

    double repeat_sum = 0.0;
    int repeat_n = 0;
    for (int u = 0; u < cfg.n_users; ++u) {
      const std::vector<int> exposed = recommend(*ranker, u, t_next, k_expose);
      std::fill(boost.begin(), boost.end(), 0.0);
      for (int i : exposed) boost[static_cast<std::size_t>(i)] = exposure_boost;

      auto& st = state[static_cast<std::size_t>(u)];
      const int size = std::min(std::max(1, poisson(gen, cfg.basket_size_mean)), cfg.n_items);
      item_weights(gt, cfg, st, u, t_next, boost.data(), w);
      Basket b = sample_basket(w, size, gen);

      if (!b.empty()) {
        int hits = 0;
        for (int i : b) {
          if (st.count[static_cast<std::size_t>(i)] > 0) ++hits;
        }
        repeat_sum += static_cast<double>(hits) / static_cast<double>(b.size());
        ++repeat_n;
      }
      apply_basket(st, b, t_next);
      ds.users[static_cast<std::size_t>(u)].baskets.push_back(std::move(b));
    }
    ds.meta = compute_meta(ds);
    curve.push_back(repeat_n > 0 ? repeat_sum / repeat_n : 0.0);
  }
  return curve;
}

}  // namespace fender
