#include "pathgraph/train/trainer.hpp"

#include <algorithm>
#include <random>

#include "pathgraph/error.hpp"
#include "pathgraph/layers/head.hpp"
#include "pathgraph/train/evaluate.hpp"
#include "pathgraph/train/parallel.hpp"

namespace pathgraph::train {

GraphGradient graph_gradient(const Model& model, const GraphInputs& graph) {
  ag::Tape tape;
  const BoundParams bound = bind_params(tape, model.params, true);
  const ForwardPass pass = forward(model.config, bound, graph);
  ag::Var loss = layers::cross_entropy(pass.logits, graph.label);
  tape.backward(loss);

  GraphGradient out;
  out.loss = loss.value().item();
  out.grads.reserve(bound.leaves.size());
  for (std::size_t i = 0; i < bound.leaves.size(); ++i) {
    out.grads.push_back(leaf_grad_as_param(tape, bound.leaves[i], model.params.tensor(i)));
  }
  return out;
}

TrainResult train_loop(const graphio::Dataset& dataset, const ModelConfig& model_cfg, const TrainConfig& cfg,
                       const EpochCallback& on_epoch) {
  validate(cfg);
  graphio::validate(dataset);
  if (model_cfg.d_in != dataset.feature_dim || model_cfg.num_classes != dataset.num_classes) {
    fail(ErrorKind::config, "model expects d_in " + std::to_string(model_cfg.d_in) + " and " +
                                std::to_string(model_cfg.num_classes) + " classes, dataset has " +
                                std::to_string(dataset.feature_dim) + " and " + std::to_string(dataset.num_classes));
  }
  std::vector<std::size_t> train_idx = dataset.indices(graphio::Split::train);
  const std::vector<std::size_t> val_idx = dataset.indices(graphio::Split::val);
  if (train_idx.empty()) fail(ErrorKind::invalid_argument, "dataset '" + dataset.name + "' has an empty train split");
  if (val_idx.empty()) fail(ErrorKind::invalid_argument, "dataset '" + dataset.name + "' has an empty val split");

  Model model = build_model(model_cfg);
  std::vector<GraphInputs> inputs(dataset.graphs.size());
  parallel_for(dataset.graphs.size(), cfg.threads,
               [&](std::size_t i) { inputs[i] = prepare_graph(dataset.graphs[i], model_cfg); });

  const AdamWConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay};
  AdamWState state = AdamWState::zeros_like(model.params);
  const std::size_t batches_per_epoch = (train_idx.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches_per_epoch * cfg.epochs;
  std::mt19937_64 shuffle_rng(cfg.seed);

  TrainResult result;
  double best_kappa = -std::numeric_limits<double>::infinity();
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), shuffle_rng);
    double loss_sum = 0.0;
    double lr = cfg.lr;

    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, train_idx.size() - start);
      std::vector<GraphGradient> parts(count);
      parallel_for(count, cfg.threads,
                   [&](std::size_t b) { parts[b] = graph_gradient(model, inputs[train_idx[start + b]]); });

      std::vector<ag::Tensor> grads = std::move(parts[0].grads);
      loss_sum += parts[0].loss;
      for (std::size_t b = 1; b < count; ++b) {
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i].accumulate(parts[b].grads[i]);
        loss_sum += parts[b].loss;
      }
      const double inv = 1.0 / double(count);
      for (auto& g : grads)
        for (double& v : g.data()) v *= inv;

      lr = cfg.schedule == LrSchedule::cosine ? cosine_lr(step, total_steps, cfg.lr) : cfg.lr;
      ++step;
      adamw_step(model.params, grads, state, step, adam, lr);
    }

    const EvalReport val = evaluate(model, dataset, inputs, graphio::Split::val, cfg.threads);
    EpochMetrics metrics{epoch, loss_sum / double(train_idx.size()), val.kappa_quadratic, lr};
    result.history.push_back(metrics);
    if (on_epoch) on_epoch(metrics);

    if (metrics.val_kappa > best_kappa) {
      best_kappa = metrics.val_kappa;
      result.best = make_checkpoint(model, cfg, epoch, {});
    }
  }
  result.best.history = result.history;
  result.final_model = std::move(model);
  return result;
}

}  // namespace pathgraph::train
