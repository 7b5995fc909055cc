#include "pathgraph/train/optim.hpp"

#include <cmath>
#include <numbers>

#include "pathgraph/error.hpp"

namespace pathgraph::train {

AdamWState AdamWState::zeros_like(const ParamStore& params) {
  AdamWState state;
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m.emplace_back(params.tensor(i).shape());
    state.v.emplace_back(params.tensor(i).shape());
  }
  return state;
}

void adamw_step(ParamStore& params, std::span<const ag::Tensor> grads, AdamWState& state, std::size_t t,
                const AdamWConfig& cfg, double lr) {
  if (t < 1) fail(ErrorKind::invalid_argument, "adamw: step index must be >= 1");
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    fail(ErrorKind::invalid_argument, "adamw: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params.tensor(i).shape()) {
      fail(ErrorKind::shape, "adamw: gradient for '" + params.name(i) + "' has shape " +
                                 ag::shape_string(grads[i].shape()));
    }
    if (!grads[i].all_finite()) fail(ErrorKind::numeric, "adamw: non-finite gradient for '" + params.name(i) + "'");
  }

  const double bias1 = 1.0 - std::pow(cfg.beta1, double(t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, double(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params.tensor(i).data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      theta[k] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * theta[k]);
    }
  }
  state.step = t;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr0) {
  if (total_steps == 0) return lr0;
  if (step > total_steps) fail(ErrorKind::invalid_argument, "cosine_lr: step beyond schedule");
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * double(step) / double(total_steps)));
}

}  // namespace pathgraph::train
