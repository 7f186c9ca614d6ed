#pragma once

#include <vector>

#include "fender/dataset.hpp"
#include "fender/metrics.hpp"
#include "fender/rankers.hpp"

namespace fender {

// Scores every model on each user's test basket (index T_u) at cutoff k.
// Users with empty test baskets are dropped from all metrics and counted in
// the report.
EvalReport evaluate_models(const std::vector<const Ranker*>& models, const BasketDataset& ds,
                           int k, TopFreqScope scope = TopFreqScope::kPersonal);

// Full-vocabulary ranking per user at the test index; used by the robustness
// experiment.
std::vector<std::vector<int>> full_rankings(const Ranker& model, const BasketDataset& ds);

}  // namespace fender
