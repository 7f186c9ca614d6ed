#include "fender/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fender {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool contains_sorted(const std::vector<int>& sorted, int x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

}  // namespace

std::string eval_report_to_csv(const EvalReport& r) {
  std::string out = "model,k,n_users,hr,ndcg,ntfr\n";
  for (const EvalRow& row : r.rows) {
    out += row.model + ',' + std::to_string(row.k) + ',' + std::to_string(row.n_users) + ',' +
           fmt_double(row.hr) + ',' + fmt_double(row.ndcg) + ',' + fmt_double(row.ntfr) + '\n';
  }
  return out;
}

std::string eval_report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const EvalRow& row : r.rows) {
    j["rows"].push_back({{"model", row.model},
                         {"k", row.k},
                         {"n_users", row.n_users},
                         {"hr", row.hr},
                         {"ndcg", row.ndcg},
                         {"ntfr", row.ntfr}});
  }
  j["n_users_excluded"] = r.n_users_excluded;
  j["curves"] = r.curves;
  j["avg_inserted_rank"] = r.avg_inserted_rank;
  return j.dump(2) + "\n";
}

std::vector<std::vector<int>> top_frequent_sets(const BasketDataset& ds,
                                                const std::vector<int>& at_t, int k_freq,
                                                TopFreqScope scope) {
  if (at_t.size() != ds.users.size()) {
    throw std::invalid_argument("top_frequent_sets: at_t size mismatch");
  }
  const auto top_of_counts = [k_freq](const std::vector<std::int64_t>& counts) {
    std::vector<int> items;
    for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
      if (counts[static_cast<std::size_t>(i)] > 0) items.push_back(i);
    }
    std::sort(items.begin(), items.end(), [&](int a, int b) {
      const auto ca = counts[static_cast<std::size_t>(a)], cb = counts[static_cast<std::size_t>(b)];
      if (ca != cb) return ca > cb;
      return a < b;
    });
    if (static_cast<int>(items.size()) > k_freq) items.resize(static_cast<std::size_t>(k_freq));
    std::sort(items.begin(), items.end());
    return items;
  };

  std::vector<std::vector<int>> out(ds.users.size());
  if (scope == TopFreqScope::kGlobal) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(ds.n_items), 0);
    for (std::size_t u = 0; u < ds.users.size(); ++u) {
      const int upto = std::min(at_t[u] - 1, ds.users[u].n_baskets());
      for (int t = 1; t <= upto; ++t) {
        for (int i : ds.users[u].baskets[static_cast<std::size_t>(t - 1)]) {
          counts[static_cast<std::size_t>(i)] += 1;
        }
      }
    }
    const std::vector<int> shared = top_of_counts(counts);
    for (auto& s : out) s = shared;
    return out;
  }

  std::vector<std::int64_t> counts(static_cast<std::size_t>(ds.n_items));
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    std::fill(counts.begin(), counts.end(), 0);
    const int upto = std::min(at_t[u] - 1, ds.users[u].n_baskets());
    for (int t = 1; t <= upto; ++t) {
      for (int i : ds.users[u].baskets[static_cast<std::size_t>(t - 1)]) {
        counts[static_cast<std::size_t>(i)] += 1;
      }
    }
    out[u] = top_of_counts(counts);
  }
  return out;
}

double hit_rate_at_k(const std::vector<std::vector<int>>& recs,
                     const std::vector<std::vector<int>>& truth, int k) {
  if (recs.size() != truth.size()) throw std::invalid_argument("hit_rate_at_k: size mismatch");
  double hits = 0.0;
  int evaluated = 0;
  for (std::size_t u = 0; u < recs.size(); ++u) {
    if (truth[u].empty()) continue;
    if (static_cast<int>(recs[u].size()) < k) {
      throw std::invalid_argument("hit_rate_at_k: recommendation list shorter than k");
    }
    ++evaluated;
    for (int r = 0; r < k; ++r) {
      if (contains_sorted(truth[u], recs[u][static_cast<std::size_t>(r)])) {
        hits += 1.0;
        break;
      }
    }
  }
  if (evaluated == 0) throw std::invalid_argument("hit_rate_at_k: no users with non-empty truth");
  return hits / static_cast<double>(evaluated);
}

double ndcg_at_k(const std::vector<std::vector<int>>& recs,
                 const std::vector<std::vector<int>>& truth, int k) {
  if (recs.size() != truth.size()) throw std::invalid_argument("ndcg_at_k: size mismatch");
  double total = 0.0;
  int evaluated = 0;
  for (std::size_t u = 0; u < recs.size(); ++u) {
    if (truth[u].empty()) continue;
    if (static_cast<int>(recs[u].size()) < k) {
      throw std::invalid_argument("ndcg_at_k: recommendation list shorter than k");
    }
    ++evaluated;
    double dcg = 0.0;
    for (int r = 1; r <= k; ++r) {
      if (contains_sorted(truth[u], recs[u][static_cast<std::size_t>(r - 1)])) {
        dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
      }
    }
    double idcg = 0.0;
    const int ideal = std::min<int>(static_cast<int>(truth[u].size()), k);
    for (int r = 1; r <= ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    total += dcg / idcg;
  }
  if (evaluated == 0) throw std::invalid_argument("ndcg_at_k: no users with non-empty truth");
  return total / static_cast<double>(evaluated);
}

double ntfr_at_k(const std::vector<std::vector<int>>& recs,
                 const std::vector<std::vector<int>>& topfreq, int k) {
  if (recs.size() != topfreq.size()) throw std::invalid_argument("ntfr_at_k: size mismatch");
  if (recs.empty()) throw std::invalid_argument("ntfr_at_k: no users");
  double total = 0.0;
  for (std::size_t u = 0; u < recs.size(); ++u) {
    if (static_cast<int>(recs[u].size()) < k) {
      throw std::invalid_argument("ntfr_at_k: recommendation list shorter than k");
    }
    int overlap = 0;
    for (int r = 0; r < k; ++r) {
      if (contains_sorted(topfreq[u], recs[u][static_cast<std::size_t>(r)])) ++overlap;
    }
    total += 1.0 - static_cast<double>(overlap) / static_cast<double>(k);
  }
  return total / static_cast<double>(recs.size());
}

double average_inserted_rank(const std::vector<std::vector<int>>& full_rankings,
                             const std::vector<int>& inserted) {
  if (full_rankings.size() != inserted.size()) {
    throw std::invalid_argument("average_inserted_rank: size mismatch");
  }
  if (full_rankings.empty()) throw std::invalid_argument("average_inserted_rank: no users");
  double total = 0.0;
  for (std::size_t u = 0; u < full_rankings.size(); ++u) {
    const auto& ranking = full_rankings[u];
    const auto it = std::find(ranking.begin(), ranking.end(), inserted[u]);
    if (it == ranking.end()) {
      throw std::runtime_error("average_inserted_rank: inserted item " +
                               std::to_string(inserted[u]) + " missing from ranking of user " +
                               std::to_string(u));
    }
    total += static_cast<double>(it - ranking.begin()) + 1.0;
  }
  return total / static_cast<double>(full_rankings.size());
}

int distinct_item_count(const std::vector<std::vector<int>>& lists) {
  std::set<int> seen;
  for (const auto& l : lists) seen.insert(l.begin(), l.end());
  return static_cast<int>(seen.size());
}

}  // namespace fender
