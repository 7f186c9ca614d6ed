#include "fender/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace fender {

void apply_update(OptimizerState& st, const std::string& block, std::span<double> params,
                  std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("apply_update: size mismatch in block '" + block + "'");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw std::runtime_error("apply_update: non-finite gradient in block '" + block + "'");
    }
  }
  st.step += 1;

  if (st.mode == Optimizer::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= st.learning_rate * (grads[i] + st.weight_decay * params[i]);
    }
    return;
  }

  AdamSlot& slot = st.slots[block];
  if (slot.m.size() != params.size()) {
    slot.m.assign(params.size(), 0.0);
    slot.v.assign(params.size(), 0.0);
    slot.t = 0;
  }
  slot.t += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(slot.t));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(slot.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    slot.m[i] = st.beta1 * slot.m[i] + (1.0 - st.beta1) * grads[i];
    slot.v[i] = st.beta2 * slot.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
    const double mhat = slot.m[i] / bc1;
    const double vhat = slot.v[i] / bc2;
    params[i] -= st.learning_rate * (mhat / (std::sqrt(vhat) + st.epsilon) + st.weight_decay * params[i]);
  }
}

double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic_grad,
                         double eps) {
  if (x.size() != analytic_grad.size()) {
    throw std::invalid_argument("finite_diff_check: gradient size mismatch");
  }
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f(probe);
    probe[i] = orig - eps;
    const double fm = f(probe);
    probe[i] = orig;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double denom = std::fmax(std::fmax(std::fabs(analytic_grad[i]), std::fabs(numeric)), 1e-8);
    worst = std::fmax(worst, std::fabs(analytic_grad[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace fender
