#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fender {

// One neural tensor layer: score(e_u, e_i) = sigmoid(h . s) with
//   s[m] = e_u' W1[:,:,m] e_i + W2[m,:] [e_u; e_i] + b[m],  m = 0..k-1.
// W1 is stored with the slice index fastest: w1[(a*d + b)*k + m].
struct NtlParams {
  int d = 0;  // embedding dimension
  int k = 0;  // tensor slice count
  std::vector<double> w1;  // d*d*k
  std::vector<double> w2;  // k x 2d, row-major
  std::vector<double> b;   // k
  std::vector<double> h;   // k

  static NtlParams zeros(int d, int k);
  // uniform(-1/sqrt(d), 1/sqrt(d)) weights, b = 0
  static NtlParams random_init(int d, int k, std::mt19937_64& g);

  std::size_t n_params() const { return w1.size() + w2.size() + b.size() + h.size(); }
};

struct NtlGradients {
  std::vector<double> w1, w2, b, h;
  std::vector<double> e_u, e_i;
};

// Accumulation targets for the hot training loop; all spans must be distinct.
struct NtlGradView {
  std::span<double> w1, w2, b, h;
  std::span<double> e_u, e_i;
};

// Pre-activation slice vector s (before the h projection and the sigmoid).
std::vector<double> ntl_preactivations(const NtlParams& p, std::span<const double> e_u,
                                       std::span<const double> e_i);

double ntl_forward(const NtlParams& p, std::span<const double> e_u, std::span<const double> e_i);

// Accumulates (+=) gradients of upstream * ntl_forward into `out`.
void ntl_backward_acc(const NtlParams& p, std::span<const double> e_u,
                      std::span<const double> e_i, double upstream, const NtlGradView& out);

NtlGradients ntl_backward(const NtlParams& p, std::span<const double> e_u,
                          std::span<const double> e_i, double upstream);

}  // namespace fender
