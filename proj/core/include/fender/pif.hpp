#pragma once

#include <vector>

#include "fender/dataset.hpp"

namespace fender {

// Sorted purchase positions per (user, item); answers PIF queries by binary
// search. Immutable after build_pif_index.
struct PifIndex {
  // positions[u] is sorted by item id; each position list is strictly increasing.
  std::vector<std::vector<std::pair<int, std::vector<int>>>> positions;
  std::vector<int> basket_counts;  // T per user
  int n_items = 0;

  int n_users() const { return static_cast<int>(basket_counts.size()); }
};

PifIndex build_pif_index(const BasketDataset& ds);

// Purchases of item i by user u in baskets 1..t-1. Unknown items count 0.
int purchase_count_before(const PifIndex& idx, int u, int i, int t);

// PIF(u,i,t) = purchase_count_before / (t-1). Requires t >= 2.
double pif(const PifIndex& idx, int u, int i, int t);

}  // namespace fender
