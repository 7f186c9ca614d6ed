#pragma once

#include <cmath>
#include <span>

namespace fender {

// Numerically stable logistic function; strictly inside (0, 1) for finite x.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

// BPR pairwise term -log sigmoid(pos - neg); always > 0.
inline double bpr_pair_loss(double pos, double neg) {
  return softplus(neg - pos);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace fender
