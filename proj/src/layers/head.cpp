#include "pathgraph/layers/head.hpp"

#include "pathgraph/error.hpp"

namespace pathgraph::layers {

ag::Var global_mean_pool(ag::Var features) {
  if (features.rows() == 0) fail(ErrorKind::invalid_argument, "global_mean_pool: no nodes");
  return ag::segment_mean(features, ag::Index(features.rows(), 0), 1);
}

ag::Var mlp_forward(ag::Var pooled, std::span<const LinearParams> layers) {
  if (layers.empty()) fail(ErrorKind::config, "mlp: no layers");
  ag::Var x = pooled;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    x = ag::add_row(ag::matmul(x, layers[k].weight), layers[k].bias);
    if (k + 1 < layers.size()) x = ag::relu(x);
  }
  return x;
}

ag::Var cross_entropy(ag::Var logits, std::size_t label) { return ag::softmax_cross_entropy(logits, label); }

}  // namespace pathgraph::layers
