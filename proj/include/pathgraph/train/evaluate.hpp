#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "pathgraph/graphio/graph.hpp"
#include "pathgraph/metrics/kappa.hpp"
#include "pathgraph/train/model.hpp"

namespace pathgraph::train {

struct EvalReport {
  metrics::ConfusionMatrix confusion{1};
  double kappa_quadratic = 0.0;
  double kappa_unweighted = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// Argmax-logit predictions (ties to the lower class) over one split.
/// Throws Error(config) when model and dataset dimensions disagree and
/// Error(invalid_argument) for an empty split.
EvalReport evaluate(const Model& model, const graphio::Dataset& dataset, graphio::Split split, std::size_t threads = 1);

/// Same, reusing already prepared per-graph inputs (indexed like dataset.graphs).
EvalReport evaluate(const Model& model, const graphio::Dataset& dataset, const std::vector<GraphInputs>& inputs,
                    graphio::Split split, std::size_t threads = 1);

/// Builds the report from explicit label/prediction pairs.
EvalReport make_report(std::size_t num_classes, const std::vector<std::size_t>& truth,
                       const std::vector<std::size_t>& predicted);

/// {"confusion", "kappa_quadratic", "kappa_unweighted", "accuracy", "n"}.
nlohmann::json to_json(const EvalReport& report);

}  // namespace pathgraph::train
