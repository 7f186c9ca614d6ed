#include "fender/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fender/rng.hpp"

namespace fender {

namespace {

// Strict integer field parse; rejects empty and trailing garbage.
bool parse_int64(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  return pos == s.size();
}

std::string strip_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_idmap(const std::string& path, const std::vector<std::int64_t>& orig_ids) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write id-map sidecar: " + path);
  out << "original_id,dense_id\n";
  for (std::size_t dense = 0; dense < orig_ids.size(); ++dense) {
    out << orig_ids[dense] << ',' << dense << '\n';
  }
}

}  // namespace

DatasetMeta compute_meta(const BasketDataset& ds) {
  DatasetMeta m;
  m.n_users = ds.n_users();
  m.n_items = ds.n_items;
  std::int64_t items_total = 0;
  for (const auto& u : ds.users) {
    m.n_baskets += u.n_baskets();
    for (const auto& b : u.baskets) items_total += static_cast<std::int64_t>(b.size());
  }
  m.avg_basket_size = m.n_baskets > 0 ? static_cast<double>(items_total) / static_cast<double>(m.n_baskets) : 0.0;
  return m;
}

BasketDataset load_dataset(const std::string& path, int min_baskets) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  {
    auto header = split_fields(strip_cr(line));
    if (header.size() != 3 || header[0] != "user_id" || header[1] != "basket_seq" ||
        header[2] != "item_id") {
      throw std::runtime_error(path + ":1: expected header 'user_id,basket_seq,item_id'");
    }
  }

  // orig user -> (basket_seq -> set of orig items)
  std::map<std::int64_t, std::map<std::int64_t, std::set<std::int64_t>>> grouped;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = strip_cr(line);
    if (row.empty()) continue;
    auto fields = split_fields(row);
    std::int64_t uid, seq, iid;
    if (fields.size() != 3 || !parse_int64(fields[0], uid) || !parse_int64(fields[1], seq) ||
        !parse_int64(fields[2], iid)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row '" + row + "'");
    }
    grouped[uid][seq].insert(iid);  // duplicate rows within a basket collapse here
  }

  // Keep users with strictly more than min_baskets baskets.
  std::vector<std::int64_t> kept_users;
  std::set<std::int64_t> kept_items;
  for (const auto& [uid, baskets] : grouped) {
    if (static_cast<int>(baskets.size()) > min_baskets) {
      kept_users.push_back(uid);
      for (const auto& [seq, items] : baskets) kept_items.insert(items.begin(), items.end());
    }
  }
  if (kept_users.empty()) {
    throw std::runtime_error(path + ": no users left after min_baskets=" +
                             std::to_string(min_baskets) + " filter");
  }

  BasketDataset ds;
  ds.user_orig_ids = kept_users;
  ds.item_orig_ids.assign(kept_items.begin(), kept_items.end());
  ds.n_items = static_cast<int>(ds.item_orig_ids.size());

  std::map<std::int64_t, int> item_dense;
  for (int i = 0; i < ds.n_items; ++i) item_dense[ds.item_orig_ids[i]] = i;

  ds.users.reserve(kept_users.size());
  for (std::size_t u = 0; u < kept_users.size(); ++u) {
    UserHistory h;
    h.user_id = static_cast<int>(u);
    for (const auto& [seq, items] : grouped[kept_users[u]]) {
      Basket b;
      b.reserve(items.size());
      for (std::int64_t it : items) b.push_back(item_dense[it]);
      std::sort(b.begin(), b.end());
      h.baskets.push_back(std::move(b));
    }
    ds.users.push_back(std::move(h));
  }
  ds.meta = compute_meta(ds);

  write_idmap(path + ".users.idmap.csv", ds.user_orig_ids);
  write_idmap(path + ".items.idmap.csv", ds.item_orig_ids);
  return ds;
}

void save_dataset_csv(const BasketDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << "user_id,basket_seq,item_id\n";
  for (const auto& u : ds.users) {
    const std::int64_t uid =
        u.user_id < static_cast<int>(ds.user_orig_ids.size()) ? ds.user_orig_ids[u.user_id] : u.user_id;
    for (int t = 1; t <= u.n_baskets(); ++t) {
      for (int item : u.baskets[t - 1]) {
        const std::int64_t iid =
            item < static_cast<int>(ds.item_orig_ids.size()) ? ds.item_orig_ids[item] : item;
        out << uid << ',' << t << ',' << iid << '\n';
      }
    }
  }
}

SplitView split(const BasketDataset& ds) {
  SplitView sv;
  sv.train_horizon.reserve(ds.users.size());
  for (const auto& u : ds.users) {
    const int T = u.n_baskets();
    if (T < 3) {
      throw std::invalid_argument("split: user " + std::to_string(u.user_id) +
                                  " has fewer than 3 baskets");
    }
    sv.train_horizon.push_back(T - 2);
    sv.valid_basket.push_back(T - 1);
    sv.test_basket.push_back(T);
  }
  return sv;
}

std::pair<BasketDataset, std::vector<int>> insert_noise_item(const BasketDataset& ds,
                                                             std::uint64_t seed) {
  std::mt19937_64 gen(mix_seed(seed, 0x6e6f697365ULL));  // one draw per user, in user order
  BasketDataset out = ds;
  std::vector<int> inserted(ds.users.size(), -1);

  for (std::size_t u = 0; u < out.users.size(); ++u) {
    std::vector<char> purchased(static_cast<std::size_t>(ds.n_items), 0);
    for (const auto& b : out.users[u].baskets) {
      for (int i : b) purchased[static_cast<std::size_t>(i)] = 1;
    }
    std::vector<int> never;
    never.reserve(static_cast<std::size_t>(ds.n_items));
    for (int i = 0; i < ds.n_items; ++i) {
      if (!purchased[static_cast<std::size_t>(i)]) never.push_back(i);
    }
    if (never.empty()) {
      throw std::runtime_error("insert_noise_item: user " + std::to_string(out.users[u].user_id) +
                               " has purchased every item in the vocabulary");
    }
    const int pick = never[uniform_int(gen, static_cast<int>(never.size()))];
    inserted[u] = pick;
    for (auto& b : out.users[u].baskets) {
      b.insert(std::lower_bound(b.begin(), b.end(), pick), pick);
    }
  }
  out.meta = compute_meta(out);
  return {std::move(out), std::move(inserted)};
}

namespace {

std::vector<double> repeat_curve(const BasketDataset& ds, const PredictionProvider* predict) {
  int max_t = 0;
  for (const auto& u : ds.users) max_t = std::max(max_t, u.n_baskets());
  std::vector<double> sums(static_cast<std::size_t>(max_t), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(max_t), 0);

  for (const auto& u : ds.users) {
    std::vector<char> seen(static_cast<std::size_t>(ds.n_items), 0);
    for (int t = 1; t <= u.n_baskets(); ++t) {
      const Basket& truth = u.baskets[t - 1];
      if (t >= 2 && !truth.empty()) {
        std::vector<int> probe;
        if (predict) {
          const int want = static_cast<int>(truth.size());
          probe = (*predict)(u.user_id, t, want);
          if (static_cast<int>(probe.size()) < want) {
            throw std::invalid_argument("repeat_percentage: prediction list shorter than basket " +
                                        std::to_string(t) + " of user " + std::to_string(u.user_id));
          }
          probe.resize(static_cast<std::size_t>(want));
        } else {
          probe = truth;
        }
        int hits = 0;
        for (int i : probe) {
          if (i >= 0 && i < ds.n_items && seen[static_cast<std::size_t>(i)]) ++hits;
        }
        sums[static_cast<std::size_t>(t - 1)] += static_cast<double>(hits) / static_cast<double>(probe.size());
        counts[static_cast<std::size_t>(t - 1)] += 1;
      }
      for (int i : truth) seen[static_cast<std::size_t>(i)] = 1;
    }
  }

  std::vector<double> curve(static_cast<std::size_t>(max_t), 0.0);
  for (int t = 2; t <= max_t; ++t) {
    const std::size_t ix = static_cast<std::size_t>(t - 1);
    curve[ix] = counts[ix] > 0 ? sums[ix] / counts[ix] : 0.0;
  }
  return curve;  // curve[0] (basket 1) stays 0 by definition
}

}  // namespace

std::vector<double> repeat_percentage(const BasketDataset& ds) { return repeat_curve(ds, nullptr); }

std::vector<double> repeat_percentage(const BasketDataset& ds, const PredictionProvider& predict) {
  return repeat_curve(ds, &predict);
}

}  // namespace fender
