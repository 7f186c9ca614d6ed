#include "fender/evaluate.hpp"

#include <stdexcept>

namespace fender {

EvalReport evaluate_models(const std::vector<const Ranker*>& models, const BasketDataset& ds,
                           int k, TopFreqScope scope) {
  if (models.empty()) throw std::invalid_argument("evaluate_models: no models");

  std::vector<int> test_t(ds.users.size());
  std::vector<std::size_t> kept;
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    test_t[u] = ds.users[u].n_baskets();
    if (!ds.users[u].baskets.empty() && !ds.users[u].baskets.back().empty()) kept.push_back(u);
  }
  if (kept.empty()) throw std::runtime_error("evaluate_models: all test baskets empty");

  const auto topfreq_all = top_frequent_sets(ds, test_t, k, scope);

  std::vector<std::vector<int>> truth(kept.size()), topfreq(kept.size());
  for (std::size_t x = 0; x < kept.size(); ++x) {
    truth[x] = ds.users[kept[x]].baskets.back();  // already sorted
    topfreq[x] = topfreq_all[kept[x]];
  }

  EvalReport report;
  report.n_users_excluded = static_cast<int>(ds.users.size() - kept.size());
  for (const Ranker* model : models) {
    std::vector<std::vector<int>> recs(kept.size());
    for (std::size_t x = 0; x < kept.size(); ++x) {
      const int u = static_cast<int>(kept[x]);
      recs[x] = recommend(*model, u, test_t[kept[x]], k);
    }
    EvalRow row;
    row.model = model->name();
    row.k = k;
    row.n_users = static_cast<int>(kept.size());
    row.hr = hit_rate_at_k(recs, truth, k);
    row.ndcg = ndcg_at_k(recs, truth, k);
    row.ntfr = ntfr_at_k(recs, topfreq, k);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<std::vector<int>> full_rankings(const Ranker& model, const BasketDataset& ds) {
  std::vector<std::vector<int>> out(ds.users.size());
  for (std::size_t u = 0; u < ds.users.size(); ++u) {
    out[u] = recommend(model, static_cast<int>(u), ds.users[u].n_baskets(), model.n_items());
  }
  return out;
}

}  // namespace fender
