#include "fender/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fender/math.hpp"
#include "fender/rng.hpp"

namespace fender {

namespace {

constexpr std::uint64_t kStage1Stream = 0x5031;
constexpr std::uint64_t kStage2Stream = 0x5032;

void fill_uniform(std::vector<double>& v, double scale, std::mt19937_64& g) {
  for (auto& x : v) x = uniform_in(g, -scale, scale);
}

struct NtlBlocks {
  std::vector<double> w1, w2, b, h;
  explicit NtlBlocks(const NtlParams& p)
      : w1(p.w1.size(), 0.0), w2(p.w2.size(), 0.0), b(p.b.size(), 0.0), h(p.h.size(), 0.0) {}
  void zero() {
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(h.begin(), h.end(), 0.0);
  }
};

void update_ntl(OptimizerState& opt, const std::string& prefix, NtlParams& p, NtlBlocks& g) {
  apply_update(opt, prefix + ".w1", p.w1, g.w1);
  apply_update(opt, prefix + ".w2", p.w2, g.w2);
  apply_update(opt, prefix + ".b", p.b, g.b);
  apply_update(opt, prefix + ".h", p.h, g.h);
}

}  // namespace

std::span<const double> Stage1Model::user_vec(int u, int t) const {
  if (u < 0 || u >= n_users() || t < 2 || t > max_t(u)) {
    throw std::out_of_range("stage1: no embedding for user " + std::to_string(u) + " at basket " +
                            std::to_string(t));
  }
  return {user_emb.data() + user_offset[static_cast<std::size_t>(u)] +
              static_cast<std::size_t>(t - 2) * static_cast<std::size_t>(d),
          static_cast<std::size_t>(d)};
}

std::span<const double> Stage1Model::item_vec(int i) const {
  if (i < 0 || i >= n_items()) {
    throw std::out_of_range("stage1: unknown item " + std::to_string(i));
  }
  return {item_emb.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d),
          static_cast<std::size_t>(d)};
}

std::span<const double> Stage2Model::user_vec(int u) const {
  const int n = d > 0 ? static_cast<int>(user_emb.size()) / d : 0;
  if (u < 0 || u >= n) throw std::out_of_range("stage2: unknown user " + std::to_string(u));
  return {user_emb.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(d),
          static_cast<std::size_t>(d)};
}

std::span<const double> Stage2Model::item_vec(int i) const {
  const int n = d > 0 ? static_cast<int>(item_emb.size()) / d : 0;
  if (i < 0 || i >= n) throw std::out_of_range("stage2: unknown item " + std::to_string(i));
  return {item_emb.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d),
          static_cast<std::size_t>(d)};
}

double stage1_score(const Stage1Model& m, int u, int t, int i) {
  return ntl_forward(m.ntl, m.user_vec(u, t), m.item_vec(i));
}

double stage2_confounder_score(const Stage2Model& m, int u, int i) {
  return ntl_forward(m.ntl, m.user_vec(u), m.item_vec(i));
}

double fender_score(const Stage2Model& m, int u, int t, int i, double omega) {
  const double c = stage2_confounder_score(m, u, i);
  const double p = stage1_score(m.stage1, u, t, i);
  return omega * c + (1.0 - omega) * p;
}

double fender_score(const Stage2Model& m, int u, int t, int i) {
  return fender_score(m, u, t, i, m.omega);
}

// ---------------------------------------------------------------------------
// Stage 1: PIF factorization.
// Draw order per run: NTL init, user rows (user-major), item embeddings; then
// per epoch rho zero-PIF rejections per positive (positive order) followed by
// one shuffle of the sample list.
// ---------------------------------------------------------------------------

namespace {

struct Stage1Sample {
  int row;  // global (u,t) row
  int u;
  int item;
  double target;
};

}  // namespace

std::vector<PifSample> stage1_positive_samples(const BasketDataset& ds, const PifIndex& idx) {
  std::vector<PifSample> out;
  std::vector<int> seen;
  for (int u = 0; u < ds.n_users(); ++u) {
    const UserHistory& hist = ds.users[static_cast<std::size_t>(u)];
    seen.clear();
    for (int t = 2; t <= hist.n_baskets(); ++t) {
      for (int i : hist.baskets[static_cast<std::size_t>(t - 2)]) {
        const auto at = std::lower_bound(seen.begin(), seen.end(), i);
        if (at == seen.end() || *at != i) seen.insert(at, i);
      }
      for (int i : seen) out.push_back({u, t, i, pif(idx, u, i, t)});
    }
  }
  return out;
}

Stage1Model train_stage1(const BasketDataset& ds, const PifIndex& idx, const TrainConfig& cfg) {
  if (cfg.d < 1 || cfg.k_ntl < 1 || cfg.epochs < 1) {
    throw std::invalid_argument("train_stage1: invalid config");
  }
  const int n_users = ds.n_users();
  const int n_items = ds.n_items;
  const int d = cfg.d;

  std::mt19937_64 gen(mix_seed(cfg.seed, kStage1Stream));

  Stage1Model m;
  m.d = d;
  m.k_ntl = cfg.k_ntl;
  m.ntl = NtlParams::random_init(d, cfg.k_ntl, gen);

  m.user_offset.resize(static_cast<std::size_t>(n_users));
  m.user_rows.resize(static_cast<std::size_t>(n_users));
  std::size_t rows_total = 0;
  for (int u = 0; u < n_users; ++u) {
    const int rows = std::max(0, ds.users[static_cast<std::size_t>(u)].n_baskets() - 1);
    m.user_offset[static_cast<std::size_t>(u)] = rows_total * static_cast<std::size_t>(d);
    m.user_rows[static_cast<std::size_t>(u)] = rows;
    rows_total += static_cast<std::size_t>(rows);
  }
  m.user_emb.resize(rows_total * static_cast<std::size_t>(d));
  m.item_emb.resize(static_cast<std::size_t>(n_items) * static_cast<std::size_t>(d));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  fill_uniform(m.user_emb, scale, gen);
  fill_uniform(m.item_emb, scale, gen);

  // All positive-PIF triples, plus a membership table for zero sampling.
  std::vector<int> row_start(static_cast<std::size_t>(n_users));
  {
    int row = 0;
    for (int u = 0; u < n_users; ++u) {
      row_start[static_cast<std::size_t>(u)] = row;
      row += std::max(0, ds.users[static_cast<std::size_t>(u)].n_baskets() - 1);
    }
  }
  std::vector<Stage1Sample> positives;
  std::vector<char> seen_at(rows_total * static_cast<std::size_t>(n_items), 0);
  std::vector<int> seen_count(rows_total, 0);
  for (const PifSample& p : stage1_positive_samples(ds, idx)) {
    const int row = row_start[static_cast<std::size_t>(p.u)] + (p.t - 2);
    positives.push_back({row, p.u, p.item, p.target});
    seen_at[static_cast<std::size_t>(row) * static_cast<std::size_t>(n_items) +
            static_cast<std::size_t>(p.item)] = 1;
    seen_count[static_cast<std::size_t>(row)] += 1;
  }
  if (positives.empty()) throw std::runtime_error("train_stage1: no positive-PIF triples");

  OptimizerState opt;
  opt.mode = cfg.optimizer;
  opt.learning_rate = cfg.learning_rate * cfg.stage1_lr_scale;
  opt.weight_decay = cfg.lambda_p;

  NtlBlocks ntl_grad(m.ntl);
  std::vector<double> user_grad(m.user_emb.size(), 0.0);
  std::vector<double> item_grad(m.item_emb.size(), 0.0);

  std::vector<Stage1Sample> samples;
  samples.reserve(positives.size() * static_cast<std::size_t>(1 + cfg.zero_pairs_per_positive));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    samples.assign(positives.begin(), positives.end());
    for (const Stage1Sample& p : positives) {
      const std::size_t row = static_cast<std::size_t>(p.row);
      if (seen_count[row] >= n_items) continue;  // no zero-PIF item exists
      const char* seen_row = seen_at.data() + row * static_cast<std::size_t>(n_items);
      for (int z = 0; z < cfg.zero_pairs_per_positive; ++z) {
        int j = uniform_int(gen, n_items);
        while (seen_row[j]) j = uniform_int(gen, n_items);
        samples.push_back({p.row, p.u, j, 0.0});
      }
    }
    shuffle(samples, gen);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(cfg.minibatch));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      ntl_grad.zero();
      std::fill(user_grad.begin(), user_grad.end(), 0.0);
      std::fill(item_grad.begin(), item_grad.end(), 0.0);

      for (std::size_t s = start; s < end; ++s) {
        const Stage1Sample& smp = samples[s];
        const std::size_t uoff = m.user_offset[static_cast<std::size_t>(smp.u)] +
                                 (static_cast<std::size_t>(smp.row) -
                                  static_cast<std::size_t>(row_start[static_cast<std::size_t>(smp.u)])) *
                                     static_cast<std::size_t>(d);
        const std::size_t ioff = static_cast<std::size_t>(smp.item) * static_cast<std::size_t>(d);
        std::span<const double> eu{m.user_emb.data() + uoff, static_cast<std::size_t>(d)};
        std::span<const double> ei{m.item_emb.data() + ioff, static_cast<std::size_t>(d)};
        const double pred = ntl_forward(m.ntl, eu, ei);
        const double resid = pred - smp.target;
        loss_sum += resid * resid;
        const double upstream = 2.0 * resid * inv_batch;
        ntl_backward_acc(m.ntl, eu, ei, upstream,
                         NtlGradView{ntl_grad.w1, ntl_grad.w2, ntl_grad.b, ntl_grad.h,
                                     {user_grad.data() + uoff, static_cast<std::size_t>(d)},
                                     {item_grad.data() + ioff, static_cast<std::size_t>(d)}});
      }

      update_ntl(opt, "stage1.ntl", m.ntl, ntl_grad);
      apply_update(opt, "stage1.user_emb", m.user_emb, user_grad);
      apply_update(opt, "stage1.item_emb", m.item_emb, item_grad);
    }

    const double mse = loss_sum / static_cast<double>(samples.size());
    if (!std::isfinite(mse)) {
      throw std::runtime_error("train_stage1: loss diverged at epoch " + std::to_string(epoch + 1));
    }
    m.loss_trace.push_back(mse);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Stage 2: BPR over omega-mixed scores; stage 1 stays frozen.
// Draw order per run: NTL init, user embeddings, item embeddings; then per
// epoch one shuffle of the positive pool followed by m negative rejections
// per positive, in pool order.
// ---------------------------------------------------------------------------

namespace {

struct BprTriple {
  int u;
  int row;   // stage-1 (u,t) row for the p lookup
  int t;
  int pos;
  int neg;
};

bool in_basket(const Basket& b, int item) {
  return std::binary_search(b.begin(), b.end(), item);
}

}  // namespace

Stage2Model train_stage2(const BasketDataset& ds, const Stage1Model& stage1,
                         const TrainConfig& cfg) {
  const int n_users = ds.n_users();
  const int n_items = ds.n_items;
  const int d = cfg.d;
  if (stage1.d != d || stage1.n_users() != n_users || stage1.n_items() != n_items) {
    throw std::invalid_argument("train_stage2: stage-1 model does not match dataset/config");
  }

  std::mt19937_64 gen(mix_seed(cfg.seed, kStage2Stream));

  Stage2Model m;
  m.stage1 = stage1;
  m.d = d;
  m.k_ntl = cfg.k_ntl;
  m.ntl = NtlParams::random_init(d, cfg.k_ntl, gen);
  m.user_emb.resize(static_cast<std::size_t>(n_users) * static_cast<std::size_t>(d));
  m.item_emb.resize(static_cast<std::size_t>(n_items) * static_cast<std::size_t>(d));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  fill_uniform(m.user_emb, scale, gen);
  fill_uniform(m.item_emb, scale, gen);
  m.omega = cfg.omega_init;

  // Positive pool over training baskets: 2 <= t <= T_u - holdout.
  std::vector<BprTriple> pool;
  std::vector<int> row_of_user(static_cast<std::size_t>(n_users), 0);
  {
    int row = 0;
    for (int u = 0; u < n_users; ++u) {
      row_of_user[static_cast<std::size_t>(u)] = row;
      const UserHistory& hist = ds.users[static_cast<std::size_t>(u)];
      const int t_max = hist.n_baskets() - cfg.holdout_baskets;
      for (int t = 2; t <= t_max; ++t) {
        const Basket& b = hist.baskets[static_cast<std::size_t>(t - 1)];
        if (static_cast<int>(b.size()) >= n_items) {
          throw std::runtime_error("train_stage2: user " + std::to_string(u) + " has no negative items at basket " +
                                   std::to_string(t));
        }
        for (int i : b) pool.push_back({u, row + (t - 2), t, i, -1});
      }
      row += std::max(0, hist.n_baskets() - 1);
    }
  }
  if (pool.empty()) throw std::runtime_error("train_stage2: no training triples");

  // p is frozen, so the PIF-reconstruction score can be tabulated once for
  // every (u,t) row and item.
  const std::size_t rows_total = stage1.user_emb.size() / static_cast<std::size_t>(d);
  std::vector<double> p_tab(rows_total * static_cast<std::size_t>(n_items));
  for (int u = 0; u < n_users; ++u) {
    const UserHistory& hist = ds.users[static_cast<std::size_t>(u)];
    for (int t = 2; t <= hist.n_baskets(); ++t) {
      const std::size_t row = static_cast<std::size_t>(row_of_user[static_cast<std::size_t>(u)] + (t - 2));
      std::span<const double> eu = stage1.user_vec(u, t);
      for (int i = 0; i < n_items; ++i) {
        p_tab[row * static_cast<std::size_t>(n_items) + static_cast<std::size_t>(i)] =
            ntl_forward(stage1.ntl, eu, stage1.item_vec(i));
      }
    }
  }

  OptimizerState opt;
  opt.mode = cfg.optimizer;
  opt.learning_rate = cfg.learning_rate;
  opt.weight_decay = cfg.lambda_r;

  NtlBlocks ntl_grad(m.ntl);
  std::vector<double> user_grad(m.user_emb.size(), 0.0);
  std::vector<double> item_grad(m.item_emb.size(), 0.0);

  std::vector<BprTriple> triples;
  triples.reserve(pool.size() * static_cast<std::size_t>(cfg.negatives_per_positive));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    m.omega_trace.push_back(m.omega);

    shuffle(pool, gen);
    triples.clear();
    for (const BprTriple& p : pool) {
      const Basket& b =
          ds.users[static_cast<std::size_t>(p.u)].baskets[static_cast<std::size_t>(p.t - 1)];
      for (int s = 0; s < cfg.negatives_per_positive; ++s) {
        int j = uniform_int(gen, n_items);
        while (in_basket(b, j)) j = uniform_int(gen, n_items);
        BprTriple t = p;
        t.neg = j;
        triples.push_back(t);
      }
    }

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < triples.size(); start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end = std::min(triples.size(), start + static_cast<std::size_t>(cfg.minibatch));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      ntl_grad.zero();
      std::fill(user_grad.begin(), user_grad.end(), 0.0);
      std::fill(item_grad.begin(), item_grad.end(), 0.0);
      double omega_grad = 0.0;

      for (std::size_t s = start; s < end; ++s) {
        const BprTriple& tr = triples[s];
        const std::size_t uoff = static_cast<std::size_t>(tr.u) * static_cast<std::size_t>(d);
        const std::size_t ioff = static_cast<std::size_t>(tr.pos) * static_cast<std::size_t>(d);
        const std::size_t joff = static_cast<std::size_t>(tr.neg) * static_cast<std::size_t>(d);
        std::span<const double> eu{m.user_emb.data() + uoff, static_cast<std::size_t>(d)};
        std::span<const double> ei{m.item_emb.data() + ioff, static_cast<std::size_t>(d)};
        std::span<const double> ej{m.item_emb.data() + joff, static_cast<std::size_t>(d)};

        const double c_i = ntl_forward(m.ntl, eu, ei);
        const double c_j = ntl_forward(m.ntl, eu, ej);
        const double p_i = p_tab[static_cast<std::size_t>(tr.row) * static_cast<std::size_t>(n_items) +
                                 static_cast<std::size_t>(tr.pos)];
        const double p_j = p_tab[static_cast<std::size_t>(tr.row) * static_cast<std::size_t>(n_items) +
                                 static_cast<std::size_t>(tr.neg)];
        const double r_i = m.omega * c_i + (1.0 - m.omega) * p_i;
        const double r_j = m.omega * c_j + (1.0 - m.omega) * p_j;
        const double delta = r_i - r_j;
        loss_sum += softplus(-delta);

        const double d_delta = -sigmoid(-delta) * inv_batch;  // dL/d(delta)
        // dr/dc = omega on both sides; stage-1 p gets no gradient.
        ntl_backward_acc(m.ntl, eu, ei, d_delta * m.omega,
                         NtlGradView{ntl_grad.w1, ntl_grad.w2, ntl_grad.b, ntl_grad.h,
                                     {user_grad.data() + uoff, static_cast<std::size_t>(d)},
                                     {item_grad.data() + ioff, static_cast<std::size_t>(d)}});
        ntl_backward_acc(m.ntl, eu, ej, -d_delta * m.omega,
                         NtlGradView{ntl_grad.w1, ntl_grad.w2, ntl_grad.b, ntl_grad.h,
                                     {user_grad.data() + uoff, static_cast<std::size_t>(d)},
                                     {item_grad.data() + joff, static_cast<std::size_t>(d)}});
        // dr/domega = c - p at each side.
        omega_grad += d_delta * ((c_i - p_i) - (c_j - p_j));
      }

      update_ntl(opt, "stage2.ntl", m.ntl, ntl_grad);
      apply_update(opt, "stage2.user_emb", m.user_emb, user_grad);
      apply_update(opt, "stage2.item_emb", m.item_emb, item_grad);
      if (!cfg.freeze_omega) {
        apply_update(opt, "stage2.omega", std::span<double>{&m.omega, 1},
                     std::span<const double>{&omega_grad, 1});
      }
    }

    const double mean_loss = loss_sum / static_cast<double>(triples.size());
    if (!std::isfinite(mean_loss) || !std::isfinite(m.omega)) {
      throw std::runtime_error("train_stage2: loss diverged at epoch " + std::to_string(epoch + 1));
    }
    m.loss_trace.push_back(mean_loss);
  }
  return m;
}

}  // namespace fender
