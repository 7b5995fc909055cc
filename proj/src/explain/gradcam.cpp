#include "pathgraph/explain/gradcam.hpp"

#include <algorithm>

#include "pathgraph/autograd/ops.hpp"
#include "pathgraph/error.hpp"

namespace pathgraph::explain {

NodeSaliency gradcam_from_tape(ag::Tape& tape, ag::Var activation, ag::Var logits, std::size_t class_index) {
  if (logits.rows() != 1 || class_index >= logits.cols()) {
    fail(ErrorKind::invalid_argument, "class " + std::to_string(class_index) + " out of range for logits " +
                                          ag::shape_string(logits.shape()));
  }
  tape.retain_grad(activation);
  ag::Var score = ag::element(logits, 0, class_index);
  tape.backward(score);

  const ag::Tensor& x = activation.value();
  const ag::Tensor& g = tape.grad(activation);
  const std::size_t n = x.rows();
  const std::size_t k = x.cols();

  NodeSaliency out;
  out.class_index = class_index;
  out.channel_weights.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) out.channel_weights[c] += g(i, c);
  for (double& w : out.channel_weights) w /= double(n);

  out.scores_raw.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += out.channel_weights[c] * x(i, c);
    out.scores_raw[i] = std::max(0.0, s);
  }
  out.max_raw = n ? *std::max_element(out.scores_raw.begin(), out.scores_raw.end()) : 0.0;
  out.scores_norm = out.scores_raw;
  if (out.max_raw > 0.0)
    for (double& s : out.scores_norm) s /= out.max_raw;
  return out;
}

NodeSaliency gradcam(const train::Model& model, const train::GraphInputs& graph, std::size_t class_index,
                     const std::string& layer) {
  if (class_index >= model.config.num_classes) {
    fail(ErrorKind::invalid_argument, "class " + std::to_string(class_index) + " out of range, model has " +
                                          std::to_string(model.config.num_classes) + " classes");
  }
  // Parameters are bound as gradient leaves so the tape keeps the backward
  // rules downstream of the explained activation.
  ag::Tape tape;
  const train::BoundParams bound = train::bind_params(tape, model.params, true);
  const train::ForwardPass pass = train::forward(model.config, bound, graph);
  NodeSaliency out = gradcam_from_tape(tape, pass.activation(layer), pass.logits, class_index);
  out.layer = layer;
  return out;
}

NodeSaliency gradcam(const train::Model& model, const graphio::PatchGraph& graph, std::size_t class_index,
                     const std::string& layer) {
  NodeSaliency out = gradcam(model, train::prepare_graph(graph, model.config), class_index, layer);
  out.graph_id = graph.id;
  return out;
}

}  // namespace pathgraph::explain
