#include "fender/pif.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fender {

PifIndex build_pif_index(const BasketDataset& ds) {
  PifIndex idx;
  idx.n_items = ds.n_items;
  idx.positions.resize(ds.users.size());
  idx.basket_counts.reserve(ds.users.size());

  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    const UserHistory& h = ds.users[u];
    idx.basket_counts.push_back(h.n_baskets());
    // One pass; baskets are visited in temporal order so the position lists
    // come out strictly increasing.
    std::vector<std::vector<int>> per_item;
    std::vector<int> touched;
    per_item.resize(static_cast<std::size_t>(ds.n_items));
    for (int t = 1; t <= h.n_baskets(); ++t) {
      for (int i : h.baskets[t - 1]) {
        if (per_item[static_cast<std::size_t>(i)].empty()) touched.push_back(i);
        per_item[static_cast<std::size_t>(i)].push_back(t);
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& entries = idx.positions[u];
    entries.reserve(touched.size());
    for (int i : touched) {
      entries.emplace_back(i, std::move(per_item[static_cast<std::size_t>(i)]));
    }
  }
  return idx;
}

namespace {

const std::vector<int>* find_positions(const PifIndex& idx, int u, int i) {
  const auto& entries = idx.positions[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(entries.begin(), entries.end(), i,
                             [](const auto& e, int key) { return e.first < key; });
  if (it == entries.end() || it->first != i) return nullptr;
  return &it->second;
}

}  // namespace

int purchase_count_before(const PifIndex& idx, int u, int i, int t) {
  if (u < 0 || u >= idx.n_users()) {
    throw std::invalid_argument("pif: unknown user " + std::to_string(u));
  }
  const std::vector<int>* pos = find_positions(idx, u, i);
  if (pos == nullptr) return 0;  // unknown or never-purchased item
  return static_cast<int>(std::lower_bound(pos->begin(), pos->end(), t) - pos->begin());
}

double pif(const PifIndex& idx, int u, int i, int t) {
  if (t < 2) {
    throw std::domain_error("pif: undefined for basket index " + std::to_string(t) +
                            " (needs t >= 2)");
  }
  return static_cast<double>(purchase_count_before(idx, u, i, t)) / static_cast<double>(t - 1);
}

}  // namespace fender
