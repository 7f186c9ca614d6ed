#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <doctest.h>

#include "fender/dataset.hpp"
#include "fender/pif.hpp"
#include "fender/rng.hpp"
#include "oracles.hpp"

using namespace fender;
namespace fs = std::filesystem;

namespace {

fs::path write_tmp_csv(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "fender_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p;
}

}  // namespace

TEST_CASE("load groups rows into baskets and drops in-basket duplicates") {
  const auto p = write_tmp_csv("dup.csv",
                               "user_id,basket_seq,item_id\n"
                               "7,1,100\n"
                               "7,1,100\n"
                               "7,2,200\n");
  const BasketDataset ds = load_dataset(p.string(), 1);
  REQUIRE(ds.n_users() == 1);
  CHECK(ds.n_items == 2);
  REQUIRE(ds.users[0].n_baskets() == 2);
  CHECK(ds.users[0].baskets[0] == Basket{0});
  CHECK(ds.users[0].baskets[1] == Basket{1});
  CHECK(ds.user_orig_ids == std::vector<std::int64_t>{7});
  CHECK(ds.item_orig_ids == std::vector<std::int64_t>{100, 200});
  CHECK(ds.meta.n_baskets == 2);
  CHECK(ds.meta.avg_basket_size == doctest::Approx(1.0));
  CHECK(fs::exists(p.string() + ".users.idmap.csv"));
  CHECK(fs::exists(p.string() + ".items.idmap.csv"));
}

TEST_CASE("min_baskets filter keeps only users with strictly more baskets") {
  std::string body = "user_id,basket_seq,item_id\n";
  for (int t = 1; t <= 5; ++t) body += "1," + std::to_string(t) + ",10\n";
  for (int t = 1; t <= 6; ++t) body += "2," + std::to_string(t) + ",20\n";
  const auto p = write_tmp_csv("filter.csv", body);
  const BasketDataset ds = load_dataset(p.string(), 5);
  REQUIRE(ds.n_users() == 1);
  CHECK(ds.user_orig_ids[0] == 2);
  CHECK(ds.users[0].n_baskets() == 6);
  // the removed user's item is gone from the vocabulary too
  CHECK(ds.n_items == 1);
}

TEST_CASE("load meta matches an independent recount of a random file") {
  std::mt19937_64 g(99);
  std::string body = "user_id,basket_seq,item_id\n";
  // independent tallies while writing
  std::map<int, std::map<int, std::set<int>>> truth;
  for (int u = 0; u < 50; ++u) {
    const int T = 6 + uniform_int(g, 5);
    for (int t = 1; t <= T; ++t) {
      const int size = 1 + uniform_int(g, 6);
      for (int n = 0; n < size; ++n) {
        const int item = uniform_int(g, 40);
        body += std::to_string(u * 3) + ',' + std::to_string(t) + ',' + std::to_string(item * 7) + '\n';
        truth[u * 3][t].insert(item * 7);
      }
    }
  }
  const auto p = write_tmp_csv("recount.csv", body);
  const BasketDataset ds = load_dataset(p.string(), 5);

  std::int64_t baskets = 0, items_total = 0;
  std::set<int> vocab;
  int users = 0;
  for (const auto& [uid, per_t] : truth) {
    if (static_cast<int>(per_t.size()) <= 5) continue;
    ++users;
    for (const auto& [t, items] : per_t) {
      ++baskets;
      items_total += static_cast<std::int64_t>(items.size());
      vocab.insert(items.begin(), items.end());
    }
  }
  CHECK(ds.meta.n_users == users);
  CHECK(ds.meta.n_items == static_cast<int>(vocab.size()));
  CHECK(ds.meta.n_baskets == baskets);
  CHECK(ds.meta.avg_basket_size ==
        doctest::Approx(static_cast<double>(items_total) / baskets).epsilon(1e-12));
}

TEST_CASE("load errors") {
  SUBCASE("malformed row reports its line number") {
    const auto p = write_tmp_csv("bad.csv", "user_id,basket_seq,item_id\n1,1,5\n1,x,6\n");
    CHECK_THROWS_WITH_AS(load_dataset(p.string(), 0), doctest::Contains(":3:"), std::runtime_error);
  }
  SUBCASE("wrong header") {
    const auto p = write_tmp_csv("hdr.csv", "user,seq,item\n1,1,5\n");
    CHECK_THROWS_AS(load_dataset(p.string(), 0), std::runtime_error);
  }
  SUBCASE("empty after filtering") {
    const auto p = write_tmp_csv("few.csv", "user_id,basket_seq,item_id\n1,1,5\n1,2,5\n");
    CHECK_THROWS_WITH_AS(load_dataset(p.string(), 5), doctest::Contains("min_baskets"),
                         std::runtime_error);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_dataset("/nonexistent.csv", 5), std::runtime_error); }
}

TEST_CASE("split produces train 1..T-2, valid T-1, test T") {
  BasketDataset ds = oracle::random_dataset(6, 10, 6, 6, 1);
  const SplitView sv = split(ds);
  CHECK(sv.train_horizon[0] == 4);
  CHECK(sv.valid_basket[0] == 5);
  CHECK(sv.test_basket[0] == 6);

  BasketDataset tiny = oracle::random_dataset(1, 10, 3, 3, 2);
  const SplitView sv3 = split(tiny);
  CHECK(sv3.train_horizon[0] == 1);
  CHECK(sv3.valid_basket[0] == 2);
  CHECK(sv3.test_basket[0] == 3);
}

TEST_CASE("split partitions every user's baskets") {
  const BasketDataset ds = oracle::random_dataset(30, 25, 3, 9, 3);
  const SplitView sv = split(ds);
  for (int u = 0; u < ds.n_users(); ++u) {
    const int T = ds.users[static_cast<std::size_t>(u)].n_baskets();
    CHECK(sv.train_horizon[static_cast<std::size_t>(u)] + 2 == T);
    std::set<int> all;
    for (int t = 1; t <= sv.train_horizon[static_cast<std::size_t>(u)]; ++t) all.insert(t);
    all.insert(sv.valid_basket[static_cast<std::size_t>(u)]);
    all.insert(sv.test_basket[static_cast<std::size_t>(u)]);
    CHECK(static_cast<int>(all.size()) == T);  // disjoint and exhaustive
  }
}

TEST_CASE("split rejects users with fewer than 3 baskets") {
  BasketDataset ds = oracle::random_dataset(1, 5, 2, 2, 4);
  CHECK_THROWS_AS(split(ds), std::invalid_argument);
}

TEST_CASE("pif worked example: two of three prior baskets contain the item") {
  BasketDataset ds;
  ds.n_items = 2;
  UserHistory h;
  h.user_id = 0;
  h.baskets = {{0}, {1}, {0}};  // milk = 0 in baskets 1 and 3
  ds.users.push_back(h);
  ds.meta = compute_meta(ds);
  const PifIndex idx = build_pif_index(ds);
  CHECK(pif(idx, 0, 0, 4) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(pif(idx, 0, 1, 4) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // never-purchased and out-of-vocabulary items score 0
  CHECK(pif(idx, 0, 999, 4) == 0.0);
  CHECK_THROWS_AS(pif(idx, 0, 0, 1), std::domain_error);
  CHECK_THROWS_AS(pif(idx, 7, 0, 2), std::invalid_argument);
}

TEST_CASE("pif index equals brute-force counting on every (u,i,t)") {
  const BasketDataset ds = oracle::random_dataset(50, 30, 3, 8, 5);
  const PifIndex idx = build_pif_index(ds);
  for (int u = 0; u < ds.n_users(); ++u) {
    const int T = ds.users[static_cast<std::size_t>(u)].n_baskets();
    for (int i = 0; i < ds.n_items; ++i) {
      for (int t = 2; t <= T; ++t) {
        CHECK(pif(idx, u, i, t) == oracle::pif_count(ds, u, i, t));
      }
    }
  }
}

TEST_CASE("pif index positions are strictly increasing") {
  const BasketDataset ds = oracle::random_dataset(20, 15, 3, 9, 6);
  const PifIndex idx = build_pif_index(ds);
  for (const auto& user_entries : idx.positions) {
    for (const auto& [item, pos] : user_entries) {
      for (std::size_t n = 1; n < pos.size(); ++n) CHECK(pos[n] > pos[n - 1]);
    }
  }
}

TEST_CASE("pif bounds, integrality and prefix monotonicity") {
  const BasketDataset ds = oracle::random_dataset(25, 20, 4, 9, 7);
  const PifIndex idx = build_pif_index(ds);
  for (int u = 0; u < ds.n_users(); ++u) {
    const int T = ds.users[static_cast<std::size_t>(u)].n_baskets();
    for (int i = 0; i < ds.n_items; ++i) {
      int prev_count = 0;
      for (int t = 2; t <= T; ++t) {
        const double v = pif(idx, u, i, t);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        const double scaled = v * (t - 1);
        CHECK(std::fabs(scaled - std::round(scaled)) < 1e-9);
        const int count = static_cast<int>(std::round(scaled));
        CHECK(count >= prev_count);
        prev_count = count;
      }
    }
  }
}

TEST_CASE("insert_noise_item puts a never-purchased item in every basket") {
  const BasketDataset ds = oracle::random_dataset(20, 30, 4, 8, 8);
  const auto [noised, inserted] = insert_noise_item(ds, 42);
  const PifIndex idx = build_pif_index(noised);
  for (int u = 0; u < ds.n_users(); ++u) {
    const int item = inserted[static_cast<std::size_t>(u)];
    // not in the original history
    for (const auto& b : ds.users[static_cast<std::size_t>(u)].baskets) {
      CHECK(!std::binary_search(b.begin(), b.end(), item));
    }
    // PIF 1.0 at every t >= 2 afterwards
    const int T = noised.users[static_cast<std::size_t>(u)].n_baskets();
    for (int t = 2; t <= T; ++t) CHECK(pif(idx, u, item, t) == 1.0);
    // strict per-user maximum purchase count unless another item is in every basket
    int max_other = 0;
    for (int i = 0; i < ds.n_items; ++i) {
      if (i == item) continue;
      int c = 0;
      for (const auto& b : noised.users[static_cast<std::size_t>(u)].baskets) {
        c += std::binary_search(b.begin(), b.end(), i) ? 1 : 0;
      }
      max_other = std::max(max_other, c);
    }
    CHECK(max_other <= T);
  }

  const auto [noised2, inserted2] = insert_noise_item(ds, 42);
  CHECK(inserted == inserted2);  // determinism

  BasketDataset full;  // a user who already purchased the whole vocabulary
  full.n_items = 2;
  UserHistory h;
  h.user_id = 0;
  h.baskets = {{0, 1}, {0, 1}};
  full.users.push_back(h);
  full.meta = compute_meta(full);
  CHECK_THROWS_WITH_AS(insert_noise_item(full, 1), doctest::Contains("user 0"), std::runtime_error);
}

TEST_CASE("repeat_percentage worked example and oracle equivalence") {
  BasketDataset ds;
  ds.n_items = 3;
  UserHistory h;
  h.user_id = 0;
  h.baskets = {{0, 1}, {0, 2}};  // {A,B}, {A,C}
  ds.users.push_back(h);
  ds.meta = compute_meta(ds);
  const auto curve = repeat_percentage(ds);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == 0.0);  // first basket has no history
  CHECK(curve[1] == doctest::Approx(0.5));

  const BasketDataset rnd = oracle::random_dataset(40, 25, 3, 10, 9);
  const auto got = repeat_percentage(rnd);
  const auto want = oracle::repeat_curve(rnd);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("repeat_percentage with a prediction provider") {
  const BasketDataset ds = oracle::random_dataset(10, 20, 4, 7, 10);
  // echoing the true basket reproduces the ground-truth curve
  const auto echo = repeat_percentage(ds, [&](int u, int t, int want) {
    auto b = ds.users[static_cast<std::size_t>(u)].baskets[static_cast<std::size_t>(t - 1)];
    b.resize(static_cast<std::size_t>(want));
    return b;
  });
  const auto truth = repeat_percentage(ds);
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(echo[i] == doctest::Approx(truth[i]));

  // short prediction lists are a precondition violation
  CHECK_THROWS_AS(repeat_percentage(ds, [](int, int, int) { return std::vector<int>{}; }),
                  std::invalid_argument);
}

TEST_CASE("repeat_percentage skips users with an empty basket at an index") {
  BasketDataset ds;
  ds.n_items = 2;
  UserHistory h;
  h.user_id = 0;
  h.baskets = {{0}, {}, {0, 1}};
  ds.users.push_back(h);
  ds.meta = compute_meta(ds);
  const auto curve = repeat_percentage(ds);
  REQUIRE(curve.size() == 3);
  CHECK(curve[1] == 0.0);                      // nobody evaluable at index 2
  CHECK(curve[2] == doctest::Approx(0.5));     // {0,1} vs prior union {0}
}

TEST_CASE("save_dataset_csv round-trips through load_dataset") {
  const BasketDataset ds = oracle::random_dataset(12, 18, 6, 9, 11);
  const fs::path p = fs::temp_directory_path() / "fender_tests" / "roundtrip.csv";
  fs::create_directories(p.parent_path());
  save_dataset_csv(ds, p.string());
  const BasketDataset back = load_dataset(p.string(), 5);
  REQUIRE(back.n_users() == ds.n_users());
  REQUIRE(back.n_items == ds.n_items);
  for (int u = 0; u < ds.n_users(); ++u) {
    CHECK(back.users[static_cast<std::size_t>(u)].baskets == ds.users[static_cast<std::size_t>(u)].baskets);
  }
  CHECK(back.meta.n_baskets == ds.meta.n_baskets);
}
