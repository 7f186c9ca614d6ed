#pragma once

#include <map>
#include <string>
#include <vector>

#include "fender/dataset.hpp"

namespace fender {

struct EvalRow {
  std::string model;
  int k = 0;
  int n_users = 0;  // users actually evaluated
  double hr = 0.0;
  double ndcg = 0.0;
  double ntfr = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  int n_users_excluded = 0;  // empty test baskets
  std::map<std::string, std::vector<double>> curves;          // e.g. omega trace
  std::map<std::string, double> avg_inserted_rank;            // per model, robustness runs
};

std::string eval_report_to_csv(const EvalReport& r);
std::string eval_report_to_json(const EvalReport& r);

enum class TopFreqScope { kPersonal, kGlobal };

// Per-user reference set of the k_freq most frequently purchased items over
// baskets 1..at_t[u]-1 (ties by ascending item id, items with zero purchases
// never enter). Global scope pools the counts across users into one shared
// set. Returned sets are sorted ascending.
std::vector<std::vector<int>> top_frequent_sets(const BasketDataset& ds,
                                                const std::vector<int>& at_t, int k_freq,
                                                TopFreqScope scope = TopFreqScope::kPersonal);

// Fraction of users whose top-k list hits at least one test-basket item.
// Users with empty truth are skipped.
double hit_rate_at_k(const std::vector<std::vector<int>>& recs,
                     const std::vector<std::vector<int>>& truth, int k);

// Binary-relevance NDCG: DCG over ranks r <= k at 1/log2(r+1), ideal DCG over
// min(|truth|, k) ranks. Users with empty truth are skipped.
double ndcg_at_k(const std::vector<std::vector<int>>& recs,
                 const std::vector<std::vector<int>>& truth, int k);

// Mean over users of 1 - |top-k recs ∩ topfreq| / k.
double ntfr_at_k(const std::vector<std::vector<int>>& recs,
                 const std::vector<std::vector<int>>& topfreq, int k);

// Mean 1-based rank of inserted[u] in each user's full-vocabulary ranking.
double average_inserted_rank(const std::vector<std::vector<int>>& full_rankings,
                             const std::vector<int>& inserted);

// Number of distinct items across the given ranked lists.
int distinct_item_count(const std::vector<std::vector<int>>& lists);

}  // namespace fender
