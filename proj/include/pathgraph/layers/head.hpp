#pragma once

#include <span>

#include "pathgraph/autograd/ops.hpp"

namespace pathgraph::layers {

/// Column means of N x d node features -> 1 x d.
ag::Var global_mean_pool(ag::Var features);

struct LinearParams {
  ag::Var weight;  // d_in x d_out
  ag::Var bias;    // 1 x d_out
};

/// Affine layers with ReLU between them; the last layer emits raw logits.
ag::Var mlp_forward(ag::Var pooled, std::span<const LinearParams> layers);

/// -log softmax(logits)[label].
ag::Var cross_entropy(ag::Var logits, std::size_t label);

}  // namespace pathgraph::layers
