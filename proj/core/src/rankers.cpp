#include "fender/rankers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fender/math.hpp"
#include "fender/rng.hpp"

namespace fender {

namespace {

constexpr std::uint64_t kBprMfStream = 0x4d46;
constexpr std::uint64_t kIpsMfStream = 0x4950;

}  // namespace

std::vector<int> recommend(const Ranker& r, int u, int t, int k) {
  if (k < 1) throw std::invalid_argument("recommend: k must be >= 1");
  const int n = r.n_items();
  std::vector<std::pair<double, int>> scored;
  scored.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) scored.emplace_back(r.score(u, t, i), i);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const int take = std::min(k, n);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i) out.push_back(scored[static_cast<std::size_t>(i)].second);
  return out;
}

double PifRanker::score(int u, int t, int i) const { return pif(idx_, u, i, t); }

PifRanker pif_ranker(const PifIndex& idx) { return PifRanker(idx); }

MfRanker::MfRanker(std::string name, int d, int n_users, int n_items)
    : name_(std::move(name)),
      d_(d),
      n_users_(n_users),
      n_items_(n_items),
      user_emb_(static_cast<std::size_t>(n_users) * static_cast<std::size_t>(d), 0.0),
      item_emb_(static_cast<std::size_t>(n_items) * static_cast<std::size_t>(d), 0.0) {}

double MfRanker::score(int u, int /*t*/, int i) const {
  if (u < 0 || u >= n_users_ || i < 0 || i >= n_items_) {
    throw std::out_of_range(name_ + ": score out of range");
  }
  const double* eu = user_emb_.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(d_);
  const double* ei = item_emb_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d_);
  double s = 0.0;
  for (int a = 0; a < d_; ++a) s += eu[a] * ei[a];
  return s;
}

double ips_weight(double pif_value, double eps_prop, double cap) {
  return std::fmin(1.0 / std::fmax(pif_value, eps_prop), cap);
}

namespace {

struct MfPositive {
  int u;
  int t;
  int item;
  double weight;  // 1 for plain BPR, inverse propensity for ips
};

// Shared BPR-MF loop. Draw order per run: user embeddings, item embeddings;
// per epoch one pool shuffle, then m negative rejections per positive.
MfRanker train_mf(const BasketDataset& ds, const TrainConfig& cfg, std::string name,
                  std::vector<MfPositive> pool, std::uint64_t stream) {
  const int n_users = ds.n_users();
  const int n_items = ds.n_items;
  const int d = cfg.d;
  if (pool.empty()) throw std::runtime_error("train_" + name + ": no training triples");

  std::mt19937_64 gen(mix_seed(cfg.seed, stream));
  MfRanker m(std::move(name), d, n_users, n_items);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& x : m.user_emb()) x = uniform_in(gen, -scale, scale);
  for (auto& x : m.item_emb()) x = uniform_in(gen, -scale, scale);

  OptimizerState opt;
  opt.mode = cfg.optimizer;
  opt.learning_rate = cfg.learning_rate;
  opt.weight_decay = cfg.lambda_r;

  std::vector<double> user_grad(m.user_emb().size(), 0.0);
  std::vector<double> item_grad(m.item_emb().size(), 0.0);

  struct Triple {
    int u, t, pos, neg;
    double weight;
  };
  std::vector<Triple> triples;
  triples.reserve(pool.size() * static_cast<std::size_t>(cfg.negatives_per_positive));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(pool, gen);
    triples.clear();
    for (const MfPositive& p : pool) {
      const Basket& b = ds.users[static_cast<std::size_t>(p.u)].baskets[static_cast<std::size_t>(p.t - 1)];
      if (static_cast<int>(b.size()) >= n_items) {
        throw std::runtime_error("train_" + m.name() + ": user " + std::to_string(p.u) +
                                 " has no negative items at basket " + std::to_string(p.t));
      }
      for (int s = 0; s < cfg.negatives_per_positive; ++s) {
        int j = uniform_int(gen, n_items);
        while (std::binary_search(b.begin(), b.end(), j)) j = uniform_int(gen, n_items);
        triples.push_back({p.u, p.t, p.item, j, p.weight});
      }
    }

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < triples.size(); start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end = std::min(triples.size(), start + static_cast<std::size_t>(cfg.minibatch));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      std::fill(user_grad.begin(), user_grad.end(), 0.0);
      std::fill(item_grad.begin(), item_grad.end(), 0.0);

      for (std::size_t s = start; s < end; ++s) {
        const Triple& tr = triples[s];
        double* eu = m.user_emb().data() + static_cast<std::size_t>(tr.u) * static_cast<std::size_t>(d);
        double* ei = m.item_emb().data() + static_cast<std::size_t>(tr.pos) * static_cast<std::size_t>(d);
        double* ej = m.item_emb().data() + static_cast<std::size_t>(tr.neg) * static_cast<std::size_t>(d);
        double delta = 0.0;
        for (int a = 0; a < d; ++a) delta += eu[a] * (ei[a] - ej[a]);
        loss_sum += tr.weight * softplus(-delta);

        const double d_delta = -sigmoid(-delta) * tr.weight * inv_batch;
        double* gu = user_grad.data() + static_cast<std::size_t>(tr.u) * static_cast<std::size_t>(d);
        double* gi = item_grad.data() + static_cast<std::size_t>(tr.pos) * static_cast<std::size_t>(d);
        double* gj = item_grad.data() + static_cast<std::size_t>(tr.neg) * static_cast<std::size_t>(d);
        for (int a = 0; a < d; ++a) {
          gu[a] += d_delta * (ei[a] - ej[a]);
          gi[a] += d_delta * eu[a];
          gj[a] -= d_delta * eu[a];
        }
      }

      apply_update(opt, m.name() + ".user_emb", m.user_emb(), user_grad);
      apply_update(opt, m.name() + ".item_emb", m.item_emb(), item_grad);
    }

    const double mean_loss = loss_sum / static_cast<double>(triples.size());
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("train_" + m.name() + ": loss diverged at epoch " + std::to_string(epoch + 1));
    }
    m.loss_trace().push_back(mean_loss);
  }
  return m;
}

}  // namespace

MfRanker train_bprmf(const BasketDataset& ds, const TrainConfig& cfg) {
  std::vector<MfPositive> pool;
  for (int u = 0; u < ds.n_users(); ++u) {
    const UserHistory& hist = ds.users[static_cast<std::size_t>(u)];
    const int t_max = hist.n_baskets() - cfg.holdout_baskets;
    for (int t = 1; t <= t_max; ++t) {
      for (int i : hist.baskets[static_cast<std::size_t>(t - 1)]) pool.push_back({u, t, i, 1.0});
    }
  }
  return train_mf(ds, cfg, "bprmf", std::move(pool), kBprMfStream);
}

MfRanker train_propensity_mf(const BasketDataset& ds, const PifIndex& idx, const TrainConfig& cfg) {
  // Positives start at t = 2, where the propensity (PIF) is defined.
  std::vector<MfPositive> pool;
  for (int u = 0; u < ds.n_users(); ++u) {
    const UserHistory& hist = ds.users[static_cast<std::size_t>(u)];
    const int t_max = hist.n_baskets() - cfg.holdout_baskets;
    for (int t = 2; t <= t_max; ++t) {
      for (int i : hist.baskets[static_cast<std::size_t>(t - 1)]) {
        pool.push_back({u, t, i, ips_weight(pif(idx, u, i, t))});
      }
    }
  }
  return train_mf(ds, cfg, "ipsmf", std::move(pool), kIpsMfStream);
}

double FenderRanker::score(int u, int t, int i) const {
  const int t_eff = std::min(std::max(t, 2), model_.stage1.max_t(u));
  const double omega = omega_override_.value_or(model_.omega);
  return fender_score(model_, u, t_eff, i, omega);
}

int FenderRanker::n_items() const { return model_.stage1.n_items(); }

}  // namespace fender
