#include "fender/ntl.hpp"

#include <cmath>
#include <stdexcept>

#include "fender/math.hpp"
#include "fender/rng.hpp"

namespace fender {

namespace {

void check_shapes(const NtlParams& p, std::span<const double> e_u, std::span<const double> e_i) {
  const std::size_t d = static_cast<std::size_t>(p.d);
  const std::size_t k = static_cast<std::size_t>(p.k);
  if (p.d < 1 || p.k < 1 || e_u.size() != d || e_i.size() != d || p.w1.size() != d * d * k ||
      p.w2.size() != k * 2 * d || p.b.size() != k || p.h.size() != k) {
    throw std::invalid_argument("ntl: parameter/embedding shape mismatch");
  }
}

}  // namespace

NtlParams NtlParams::zeros(int d, int k) {
  NtlParams p;
  p.d = d;
  p.k = k;
  p.w1.assign(static_cast<std::size_t>(d) * d * k, 0.0);
  p.w2.assign(static_cast<std::size_t>(k) * 2 * d, 0.0);
  p.b.assign(static_cast<std::size_t>(k), 0.0);
  p.h.assign(static_cast<std::size_t>(k), 0.0);
  return p;
}

NtlParams NtlParams::random_init(int d, int k, std::mt19937_64& g) {
  NtlParams p = zeros(d, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& w : p.w1) w = uniform_in(g, -scale, scale);
  for (auto& w : p.w2) w = uniform_in(g, -scale, scale);
  for (auto& w : p.h) w = uniform_in(g, -scale, scale);
  // b stays 0
  return p;
}

std::vector<double> ntl_preactivations(const NtlParams& p, std::span<const double> e_u,
                                       std::span<const double> e_i) {
  check_shapes(p, e_u, e_i);
  const int d = p.d, k = p.k;
  std::vector<double> s(p.b.begin(), p.b.end());
  for (int a = 0; a < d; ++a) {
    const double ua = e_u[static_cast<std::size_t>(a)];
    const double* row = p.w1.data() + static_cast<std::size_t>(a) * d * k;
    for (int bq = 0; bq < d; ++bq) {
      const double coef = ua * e_i[static_cast<std::size_t>(bq)];
      const double* cell = row + static_cast<std::size_t>(bq) * k;
      for (int m = 0; m < k; ++m) s[static_cast<std::size_t>(m)] += coef * cell[m];
    }
  }
  for (int m = 0; m < k; ++m) {
    const double* row = p.w2.data() + static_cast<std::size_t>(m) * 2 * d;
    double acc = 0.0;
    for (int a = 0; a < d; ++a) acc += row[a] * e_u[static_cast<std::size_t>(a)];
    for (int a = 0; a < d; ++a) acc += row[d + a] * e_i[static_cast<std::size_t>(a)];
    s[static_cast<std::size_t>(m)] += acc;
  }
  return s;
}

double ntl_forward(const NtlParams& p, std::span<const double> e_u, std::span<const double> e_i) {
  const std::vector<double> s = ntl_preactivations(p, e_u, e_i);
  double z = 0.0;
  for (int m = 0; m < p.k; ++m) z += p.h[static_cast<std::size_t>(m)] * s[static_cast<std::size_t>(m)];
  return sigmoid(z);
}

void ntl_backward_acc(const NtlParams& p, std::span<const double> e_u,
                      std::span<const double> e_i, double upstream, const NtlGradView& out) {
  const std::vector<double> s = ntl_preactivations(p, e_u, e_i);
  const int d = p.d, k = p.k;

  double z = 0.0;
  for (int m = 0; m < k; ++m) z += p.h[static_cast<std::size_t>(m)] * s[static_cast<std::size_t>(m)];
  const double sig = sigmoid(z);
  const double g = upstream * sig * (1.0 - sig);  // d(upstream * sigmoid(z)) / dz

  // ds[m] = g * h[m]; dh[m] = g * s[m]; db = ds
  std::vector<double> ds(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) {
    ds[static_cast<std::size_t>(m)] = g * p.h[static_cast<std::size_t>(m)];
    out.h[static_cast<std::size_t>(m)] += g * s[static_cast<std::size_t>(m)];
    out.b[static_cast<std::size_t>(m)] += ds[static_cast<std::size_t>(m)];
  }

  for (int a = 0; a < d; ++a) {
    const double ua = e_u[static_cast<std::size_t>(a)];
    const double* wrow = p.w1.data() + static_cast<std::size_t>(a) * d * k;
    double* grow = out.w1.data() + static_cast<std::size_t>(a) * d * k;
    double du = 0.0;
    for (int bq = 0; bq < d; ++bq) {
      const double ib = e_i[static_cast<std::size_t>(bq)];
      const double* wcell = wrow + static_cast<std::size_t>(bq) * k;
      double* gcell = grow + static_cast<std::size_t>(bq) * k;
      double wds = 0.0;
      for (int m = 0; m < k; ++m) {
        gcell[m] += ds[static_cast<std::size_t>(m)] * ua * ib;
        wds += ds[static_cast<std::size_t>(m)] * wcell[m];
      }
      du += wds * ib;
      out.e_i[static_cast<std::size_t>(bq)] += wds * ua;
    }
    out.e_u[static_cast<std::size_t>(a)] += du;
  }

  for (int m = 0; m < k; ++m) {
    const double dsm = ds[static_cast<std::size_t>(m)];
    const double* wrow = p.w2.data() + static_cast<std::size_t>(m) * 2 * d;
    double* grow = out.w2.data() + static_cast<std::size_t>(m) * 2 * d;
    for (int a = 0; a < d; ++a) {
      grow[a] += dsm * e_u[static_cast<std::size_t>(a)];
      grow[d + a] += dsm * e_i[static_cast<std::size_t>(a)];
      out.e_u[static_cast<std::size_t>(a)] += dsm * wrow[a];
      out.e_i[static_cast<std::size_t>(a)] += dsm * wrow[d + a];
    }
  }
}

NtlGradients ntl_backward(const NtlParams& p, std::span<const double> e_u,
                          std::span<const double> e_i, double upstream) {
  NtlGradients g;
  g.w1.assign(p.w1.size(), 0.0);
  g.w2.assign(p.w2.size(), 0.0);
  g.b.assign(p.b.size(), 0.0);
  g.h.assign(p.h.size(), 0.0);
  g.e_u.assign(e_u.size(), 0.0);
  g.e_i.assign(e_i.size(), 0.0);
  ntl_backward_acc(p, e_u, e_i, upstream,
                   NtlGradView{g.w1, g.w2, g.b, g.h, g.e_u, g.e_i});
  return g;
}

}  // namespace fender
