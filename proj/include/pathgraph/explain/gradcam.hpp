#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pathgraph/autograd/tape.hpp"
#include "pathgraph/graphio/graph.hpp"
#include "pathgraph/train/model.hpp"

namespace pathgraph::explain {

inline constexpr const char* kDefaultLayer = "gat2";

/// Per-node class saliency at one layer. `scores_raw` are the ReLU'd
/// weighted activations; `scores_norm` divides by `max_raw` when it is
/// positive and equals the raw scores otherwise.
struct NodeSaliency {
  std::string graph_id;
  std::size_t class_index = 0;
  std::string layer;
  std::vector<double> scores_raw;
  std::vector<double> scores_norm;
  double max_raw = 0.0;
  /// Channel weights: mean over nodes of d logit_c / d activation.
  std::vector<double> channel_weights;
};

/// Grad-CAM on an already recorded tape: `activation` is an N x K node
/// activation that `logits` (1 x C) depends on. Marks the activation as
/// retained and runs backward from logits[0, c].
NodeSaliency gradcam_from_tape(ag::Tape& tape, ag::Var activation, ag::Var logits, std::size_t class_index);

/// Forward `graph` through `model`, explain class `class_index` at `layer`.
/// Throws Error(invalid_argument) for class_index >= C or an unknown layer
/// (the message lists the retained layers).
NodeSaliency gradcam(const train::Model& model, const train::GraphInputs& graph, std::size_t class_index,
                     const std::string& layer = kDefaultLayer);

NodeSaliency gradcam(const train::Model& model, const graphio::PatchGraph& graph, std::size_t class_index,
                     const std::string& layer = kDefaultLayer);

}  // namespace pathgraph::explain
