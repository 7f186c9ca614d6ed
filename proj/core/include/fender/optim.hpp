#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fender {

enum class Optimizer { kSgd, kAdam };

struct AdamSlot {
  std::vector<double> m, v;
  std::int64_t t = 0;
};

// First-order optimizer over named parameter blocks. Updates mutate the
// caller's parameters; callers serialize updates externally.
struct OptimizerState {
  Optimizer mode = Optimizer::kSgd;
  double learning_rate = 1e-4;
  double weight_decay = 0.0;  // decoupled L2, applied every update
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;  // total apply_update calls
  std::map<std::string, AdamSlot> slots;
};

// sgd:  theta -= lr * (g + wd * theta)
// adam: bias-corrected moments, decoupled weight decay.
// Throws on non-finite gradient entries, naming the block.
void apply_update(OptimizerState& st, const std::string& block, std::span<double> params,
                  std::span<const double> grads);

// Max relative error between the analytic gradient and central finite
// differences of f at x; denominator max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic_grad,
                         double eps = 1e-5);

}  // namespace fender
