#include "pathgraph/train/evaluate.hpp"

#include "pathgraph/error.hpp"
#include "pathgraph/train/parallel.hpp"

namespace pathgraph::train {
namespace {

void check_dims(const Model& model, const graphio::Dataset& dataset) {
  if (model.config.d_in != dataset.feature_dim) {
    fail(ErrorKind::config, "dimension mismatch: model expects feature_dim " + std::to_string(model.config.d_in) +
                                ", dataset '" + dataset.name + "' has " + std::to_string(dataset.feature_dim));
  }
  if (model.config.num_classes != dataset.num_classes) {
    fail(ErrorKind::config, "dimension mismatch: model predicts " + std::to_string(model.config.num_classes) +
                                " classes, dataset '" + dataset.name + "' has " +
                                std::to_string(dataset.num_classes));
  }
}

}  // namespace

EvalReport make_report(std::size_t num_classes, const std::vector<std::size_t>& truth,
                       const std::vector<std::size_t>& predicted) {
  if (truth.empty()) fail(ErrorKind::invalid_argument, "evaluation split is empty");
  EvalReport report;
  report.confusion = metrics::ConfusionMatrix(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) report.confusion.add(truth[i], predicted[i]);
  report.n = truth.size();
  report.kappa_quadratic = metrics::kappa(report.confusion, metrics::KappaWeighting::quadratic);
  report.kappa_unweighted = metrics::kappa(report.confusion, metrics::KappaWeighting::none);
  report.accuracy = metrics::accuracy(report.confusion);
  return report;
}

EvalReport evaluate(const Model& model, const graphio::Dataset& dataset, const std::vector<GraphInputs>& inputs,
                    graphio::Split split, std::size_t threads) {
  check_dims(model, dataset);
  const std::vector<std::size_t> idx = dataset.indices(split);
  if (idx.empty()) {
    fail(ErrorKind::invalid_argument, "dataset '" + dataset.name + "' has no graphs in split " + to_string(split));
  }
  std::vector<std::size_t> truth(idx.size()), predicted(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t k) {
    truth[k] = dataset.graphs[idx[k]].label;
    predicted[k] = argmax(predict_logits(model, inputs[idx[k]]));
  });
  return make_report(model.config.num_classes, truth, predicted);
}

EvalReport evaluate(const Model& model, const graphio::Dataset& dataset, graphio::Split split, std::size_t threads) {
  check_dims(model, dataset);
  std::vector<GraphInputs> inputs(dataset.graphs.size());
  const std::vector<std::size_t> idx = dataset.indices(split);
  parallel_for(idx.size(), threads,
               [&](std::size_t k) { inputs[idx[k]] = prepare_graph(dataset.graphs[idx[k]], model.config); });
  return evaluate(model, dataset, inputs, split, threads);
}

nlohmann::json to_json(const EvalReport& report) {
  return nlohmann::json{{"confusion", report.confusion.rows()},
                        {"kappa_quadratic", report.kappa_quadratic},
                        {"kappa_unweighted", report.kappa_unweighted},
                        {"accuracy", report.accuracy},
                        {"n", report.n}};
}

}  // namespace pathgraph::train
