#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace fender {

// Item ids inside a basket are dense, sorted and unique.
using Basket = std::vector<int>;

struct UserHistory {
  int user_id = 0;               // dense id, equals position in BasketDataset::users
  std::vector<Basket> baskets;   // baskets[t-1] holds basket t; t is 1-based everywhere
  int n_baskets() const { return static_cast<int>(baskets.size()); }
};

struct DatasetMeta {
  int n_users = 0;
  int n_items = 0;
  std::int64_t n_baskets = 0;
  double avg_basket_size = 0.0;
};

// Immutable after construction; safe to share across readers.
struct BasketDataset {
  std::vector<UserHistory> users;
  int n_items = 0;  // vocabulary is dense 0..n_items-1
  std::vector<std::int64_t> user_orig_ids;  // dense id -> id in the source file
  std::vector<std::int64_t> item_orig_ids;
  DatasetMeta meta;

  int n_users() const { return static_cast<int>(users.size()); }
};

// Temporal split: per user, train = baskets 1..T-2, valid = T-1, test = T.
struct SplitView {
  std::vector<int> train_horizon;  // T-2
  std::vector<int> valid_basket;   // T-1
  std::vector<int> test_basket;    // T
};

// Recomputes meta counts from the basket lists.
DatasetMeta compute_meta(const BasketDataset& ds);

// Reads `user_id,basket_seq,item_id` CSV, groups rows into per-user ordered
// baskets (within-basket duplicates dropped), removes users with
// <= min_baskets baskets and re-indexes users/items to dense 0-based ids.
// Emits `<path>.users.idmap.csv` / `<path>.items.idmap.csv` sidecars.
BasketDataset load_dataset(const std::string& path, int min_baskets = 5);

// Writes the dataset back out in the same CSV schema, using original ids.
void save_dataset_csv(const BasketDataset& ds, const std::string& path);

SplitView split(const BasketDataset& ds);

// Per user, inserts one uniformly chosen never-purchased item into every
// basket. Returns the modified dataset and the per-user inserted item.
std::pair<BasketDataset, std::vector<int>> insert_noise_item(const BasketDataset& ds,
                                                             std::uint64_t seed);

// Ranked prediction list for (user, t); must return at least `want` items.
using PredictionProvider = std::function<std::vector<int>(int user, int t, int want)>;

// curve[t-1] = average over users with >= t baskets of the fraction of basket
// t's items already seen in baskets 1..t-1. curve[0] is always 0. When a
// prediction provider is given, the top-|B_t| predicted items stand in for
// the true basket.
std::vector<double> repeat_percentage(const BasketDataset& ds);
std::vector<double> repeat_percentage(const BasketDataset& ds,
                                      const PredictionProvider& predict);

}  // namespace fender
