#include <cmath>
#include <map>
#include <memory>

#include <doctest.h>

#include "fender/math.hpp"
#include "fender/pif.hpp"
#include "fender/rankers.hpp"
#include "fender/synth.hpp"

using namespace fender;

TEST_CASE("generate is deterministic given the seed") {
  SynthConfig cfg;
  cfg.n_users = 30;
  cfg.n_items = 40;
  cfg.baskets_per_user = 6;
  cfg.seed = 123;
  const auto [ds1, gt1] = generate(cfg);
  const auto [ds2, gt2] = generate(cfg);
  REQUIRE(ds1.n_users() == ds2.n_users());
  for (int u = 0; u < ds1.n_users(); ++u) {
    CHECK(ds1.users[static_cast<std::size_t>(u)].baskets == ds2.users[static_cast<std::size_t>(u)].baskets);
  }
  CHECK(gt1.z_user == gt2.z_user);
  CHECK(gt1.period == gt2.period);

  cfg.seed = 124;
  const auto [ds3, gt3] = generate(cfg);
  bool any_diff = false;
  for (int u = 0; u < ds1.n_users() && !any_diff; ++u) {
    any_diff = ds1.users[static_cast<std::size_t>(u)].baskets != ds3.users[static_cast<std::size_t>(u)].baskets;
  }
  CHECK(any_diff);
}

TEST_CASE("generated datasets satisfy the structural invariants") {
  SynthConfig cfg;
  cfg.n_users = 50;
  cfg.n_items = 70;
  cfg.baskets_per_user = 9;
  cfg.seed = 5;
  const auto [ds, gt] = generate(cfg);
  CHECK(ds.n_users() == cfg.n_users);
  CHECK(ds.n_items == cfg.n_items);
  for (const auto& u : ds.users) {
    CHECK(u.n_baskets() == cfg.baskets_per_user);
    for (const auto& b : u.baskets) {
      CHECK(!b.empty());
      for (std::size_t n = 0; n < b.size(); ++n) {
        CHECK(b[n] >= 0);
        CHECK(b[n] < cfg.n_items);
        if (n > 0) CHECK(b[n] > b[n - 1]);  // sorted and duplicate free
      }
    }
  }
  const DatasetMeta recount = compute_meta(ds);
  CHECK(ds.meta.n_baskets == recount.n_baskets);
  CHECK(ds.meta.avg_basket_size == recount.avg_basket_size);
}

TEST_CASE("average basket size tracks the configured mean") {
  const SynthConfig cfg;  // defaults: 200 users x 300 items, mean 8.5
  const auto [ds, gt] = generate(cfg);
  CHECK(ds.meta.avg_basket_size > 8.5 * 0.85);
  CHECK(ds.meta.avg_basket_size < 8.5 * 1.15);
}

TEST_CASE("propensity logit drops the frequency term when the effect is zero") {
  CHECK(propensity_logit(0.42, 0.9, 0.0) == 0.42);
  CHECK(propensity_logit(0.42, 0.0, 2.0) == 0.42);
  CHECK(propensity_logit(-0.3, 0.5, 2.0) == doctest::Approx(0.7));
}

TEST_CASE("with no frequency effect and no durables, repeat rates stay flat") {
  SynthConfig cfg;
  cfg.n_users = 120;
  cfg.n_items = 80;
  cfg.baskets_per_user = 10;
  cfg.pif_effect = 0.0;
  cfg.perishable_frac = 1.0;
  cfg.seed = 9;
  const auto [ds, gt] = generate(cfg);
  // purchase propensities are time-invariant, so the repeat percentage may
  // grow only through history accumulation, identically distributed per
  // basket; the curve must not show the self-reinforcing climb that a
  // positive pif_effect produces. Compare against the confounded default.
  SynthConfig boosted = cfg;
  boosted.pif_effect = 2.5;
  const auto [ds_boost, gt_boost] = generate(boosted);
  const auto flat = repeat_percentage(ds);
  const auto climb = repeat_percentage(ds_boost);
  CHECK(climb.back() > flat.back());
}

TEST_CASE("durable items respect their replenishment period") {
  SynthConfig cfg;
  cfg.n_users = 30;
  cfg.n_items = 60;
  cfg.baskets_per_user = 12;
  cfg.perishable_frac = 0.0;
  cfg.tau_min = 3;
  cfg.tau_max = 3;
  cfg.seed = 31;
  const auto [ds, gt] = generate(cfg);
  for (const auto& u : ds.users) {
    std::map<int, int> last;
    for (int t = 1; t <= u.n_baskets(); ++t) {
      for (int i : u.baskets[static_cast<std::size_t>(t - 1)]) {
        if (last.count(i)) CHECK(t - last[i] >= 3);
        last[i] = t;
      }
    }
  }
}

TEST_CASE("latent affinity genuinely confounds frequency and purchases") {
  const SynthConfig cfg;  // defaults
  const auto [ds, gt] = generate(cfg);
  // covariance between an item's purchase frequency and its latent affinity,
  // over all (user, perishable item) pairs
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  long n = 0;
  const int T = cfg.baskets_per_user;
  for (int u = 0; u < cfg.n_users; ++u) {
    std::vector<int> count(static_cast<std::size_t>(cfg.n_items), 0);
    for (const auto& b : ds.users[static_cast<std::size_t>(u)].baskets) {
      for (int i : b) count[static_cast<std::size_t>(i)] += 1;
    }
    for (int i = 0; i < cfg.n_items; ++i) {
      if (gt.durable[static_cast<std::size_t>(i)]) continue;
      const double x = static_cast<double>(count[static_cast<std::size_t>(i)]) / T;
      const double y = sigmoid(gt.affinity_logit(u, i));
      sx += x;
      sy += y;
      sxy += x * y;
      ++n;
    }
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  CHECK(cov > 0.0);
}

TEST_CASE("feedback loop amplification and determinism") {
  SynthConfig cfg;
  cfg.n_users = 60;
  cfg.n_items = 80;
  cfg.baskets_per_user = 6;
  cfg.seed = 77;
  const RankerFactory pif_factory = [](const BasketDataset& ds) -> std::unique_ptr<Ranker> {
    return std::make_unique<PifRanker>(pif_ranker(build_pif_index(ds)));
  };

  SUBCASE("single round produces a single point") {
    const auto curve = feedback_loop_sim(cfg, pif_factory, 1, 2.0, 10);
    CHECK(curve.size() == 1);
  }
  SUBCASE("same seed, same curve") {
    const auto a = feedback_loop_sim(cfg, pif_factory, 3, 2.0, 10);
    const auto b = feedback_loop_sim(cfg, pif_factory, 3, 2.0, 10);
    CHECK(a == b);
  }
  SUBCASE("exposure boost amplifies the repeat percentage") {
    const auto boosted = feedback_loop_sim(cfg, pif_factory, 6, 4.0, 15);
    CHECK(boosted.back() >= boosted.front());  // climbs over rounds
    const auto off = feedback_loop_sim(cfg, pif_factory, 6, 0.0, 15);
    CHECK(boosted.back() >= off.back());  // and beats the no-boost run
  }
}

TEST_CASE("generate rejects invalid configs") {
  SynthConfig cfg;
  cfg.perishable_frac = 1.5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.tau_max = 1;
  cfg.tau_min = 4;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}
