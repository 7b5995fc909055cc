#pragma once

#include <functional>
#include <vector>

#include "pathgraph/graphio/graph.hpp"
#include "pathgraph/train/checkpoint.hpp"
#include "pathgraph/train/model.hpp"
#include "pathgraph/train/optim.hpp"

namespace pathgraph::train {

struct TrainResult {
  /// Snapshot with the best validation kappa (earliest epoch on ties).
  Checkpoint best;
  Model final_model;
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Loss and parameter gradients (logical shapes, store order) for one graph.
struct GraphGradient {
  double loss = 0.0;
  std::vector<ag::Tensor> grads;
};

GraphGradient graph_gradient(const Model& model, const GraphInputs& graph);

/// Mini-batch AdamW training. Each epoch shuffles the train split with a
/// stream seeded from cfg.seed; each graph of a batch runs on its own tape
/// (possibly on its own thread), gradients are summed in batch order and
/// divided by the batch size. Validation quadratic kappa is logged per epoch.
TrainResult train_loop(const graphio::Dataset& dataset, const ModelConfig& model_cfg, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

}  // namespace pathgraph::train
