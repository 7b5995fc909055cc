#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pathgraph/train/model.hpp"

namespace pathgraph::train {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
};

/// First and second moments, one tensor per parameter in store order.
struct AdamWState {
  std::vector<ag::Tensor> m;
  std::vector<ag::Tensor> v;
  std::size_t step = 0;

  static AdamWState zeros_like(const ParamStore& params);
};

/// One decoupled-weight-decay Adam update at step t >= 1:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   theta <- theta - lr (m_hat / (sqrt(v_hat) + eps) + wd theta).
/// `lr` overrides cfg.lr so schedules can drive it. A non-finite gradient
/// raises Error(numeric) naming the parameter before anything is modified.
void adamw_step(ParamStore& params, std::span<const ag::Tensor> grads, AdamWState& state, std::size_t t,
                const AdamWConfig& cfg, double lr);

/// lr0 * 0.5 * (1 + cos(pi * step / total_steps)).
double cosine_lr(std::size_t step, std::size_t total_steps, double lr0);

}  // namespace pathgraph::train
