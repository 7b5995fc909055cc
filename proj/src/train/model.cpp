#include "pathgraph/train/model.hpp"

#include <cmath>
#include <random>

#include "pathgraph/error.hpp"
#include "pathgraph/layers/gcn.hpp"
#include "pathgraph/layers/head.hpp"

namespace pathgraph::train {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ag::Shape bound_shape(const std::string& name, const ag::Shape& shape) {
  switch (shape.size()) {
    case 1:
      return ends_with(name, ".attention") ? ag::Shape{shape[0], 1} : ag::Shape{1, shape[0]};
    case 2:
      return shape;
    case 3:
      return {shape[0] * shape[1], shape[2]};
    default:
      fail(ErrorKind::shape, "parameter '" + name + "' has unsupported rank " + std::to_string(shape.size()));
  }
}

std::string head_name(const std::string& layer, std::size_t k, const char* what) {
  return layer + ".head" + std::to_string(k) + "." + what;
}

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  ag::Tensor uniform(ag::Shape shape, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    ag::Tensor t(std::move(shape));
    for (double& v : t.data()) v = static_cast<double>(static_cast<float>(dist(rng_)));
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::string to_string(Variant variant) { return variant == Variant::spline_gat ? "spline-gat" : "gcn"; }

Variant parse_variant(const std::string& text) {
  if (text == "spline-gat" || text == "spline_gat") return Variant::spline_gat;
  if (text == "gcn" || text == "gcn_baseline") return Variant::gcn_baseline;
  fail(ErrorKind::config, "unknown model variant '" + text + "' (expected spline-gat or gcn)");
}

void validate(const ModelConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorKind::config, "model config: " + what); };
  if (cfg.d_in == 0) bad("d_in must be positive");
  if (cfg.num_classes < 2) bad("num_classes must be >= 2");
  if (cfg.mlp_hidden == 0) bad("mlp_hidden must be positive");
  if (cfg.variant == Variant::spline_gat) {
    layers::validate(cfg.kernel);
    for (std::size_t d : cfg.spline_dims)
      if (d == 0) bad("spline dims must be positive");
    for (std::size_t d : cfg.gat_dims)
      if (d == 0) bad("gat dims must be positive");
    for (std::size_t k : cfg.gat_heads)
      if (k == 0) bad("gat heads must be positive");
    if (!(cfg.leaky_slope >= 0.0)) bad("leaky slope must be >= 0");
  } else {
    for (std::size_t d : cfg.gcn_dims)
      if (d == 0) bad("gcn dims must be positive");
  }
}

std::size_t pooled_dim(const ModelConfig& cfg) {
  if (cfg.variant == Variant::gcn_baseline) return cfg.gcn_dims[1];
  return cfg.gat_dims[1];
}

void ParamStore::add(std::string name, ag::Tensor value) {
  if (index_.count(name)) fail(ErrorKind::invalid_argument, "duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

ag::Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::invalid_argument, "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

const ag::Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::invalid_argument, "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParamStore::num_scalars() const noexcept {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.second.size();
  return total;
}

Model build_model(const ModelConfig& cfg) {
  validate(cfg);
  Model model{cfg, {}};
  ParamStore& p = model.params;
  Initializer init(cfg.seed);

  if (cfg.variant == Variant::spline_gat) {
    const std::size_t elements = cfg.kernel.num_elements();
    std::size_t d = cfg.d_in;
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string name = "spline" + std::to_string(l + 1);
      const std::size_t out = cfg.spline_dims[l];
      p.add(name + ".weight", init.uniform({elements, d, out}, d, out));
      if (cfg.root_weight) p.add(name + ".root", init.uniform({d, out}, d, out));
      p.add(name + ".bias", ag::Tensor({out}));
      d = out;
    }
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string name = "gat" + std::to_string(l + 1);
      const std::size_t width = cfg.gat_dims[l];
      for (std::size_t k = 0; k < cfg.gat_heads[l]; ++k) {
        p.add(head_name(name, k, "weight"), init.uniform({d, width}, d, width));
        p.add(head_name(name, k, "attention"), ag::Tensor({2 * width}));
      }
      const bool concat = l == 0 && cfg.first_combine == layers::HeadCombine::concat;
      d = concat ? cfg.gat_heads[l] * width : width;
    }
  } else {
    std::size_t d = cfg.d_in;
    for (std::size_t l = 0; l < 2; ++l) {
      p.add("gcn" + std::to_string(l + 1) + ".weight", init.uniform({d, cfg.gcn_dims[l]}, d, cfg.gcn_dims[l]));
      d = cfg.gcn_dims[l];
    }
  }

  const std::size_t pooled = pooled_dim(cfg);
  p.add("mlp.0.weight", init.uniform({pooled, cfg.mlp_hidden}, pooled, cfg.mlp_hidden));
  p.add("mlp.0.bias", ag::Tensor({cfg.mlp_hidden}));
  p.add("mlp.1.weight", init.uniform({cfg.mlp_hidden, cfg.num_classes}, cfg.mlp_hidden, cfg.num_classes));
  p.add("mlp.1.bias", ag::Tensor({cfg.num_classes}));
  return model;
}

GraphInputs prepare_graph(const graphio::PatchGraph& graph, const ModelConfig& cfg) {
  graphio::validate(graph);
  if (graph.feature_dim != cfg.d_in) {
    fail(ErrorKind::config, "graph '" + graph.id + "' has feature_dim " + std::to_string(graph.feature_dim) +
                                ", model expects " + std::to_string(cfg.d_in));
  }
  GraphInputs in;
  in.num_nodes = graph.num_nodes();
  in.label = graph.label;
  in.features = ag::Tensor::matrix(in.num_nodes, graph.feature_dim);
  for (std::size_t i = 0; i < graph.features.size(); ++i) in.features[i] = graph.features[i];
  if (cfg.variant == Variant::spline_gat) {
    const graphio::PseudoCoords pseudo = graphio::compute_pseudo_coords(graph.coords, graph.edges);
    in.spline = layers::build_spline_aggregation(graph.edges, pseudo, in.num_nodes, cfg.kernel);
    in.attention = layers::build_attention_edges(graph.edges, in.num_nodes, cfg.self_loops);
  } else {
    in.gcn_adjacency = layers::build_gcn_adjacency(graph.edges, in.num_nodes, cfg.self_loops);
  }
  return in;
}

ag::Var BoundParams::operator[](const std::string& name) const {
  auto it = by_name.find(name);
  if (it == by_name.end()) fail(ErrorKind::invalid_argument, "parameter '" + name + "' is not bound");
  return it->second;
}

BoundParams bind_params(ag::Tape& tape, const ParamStore& params, bool requires_grad) {
  BoundParams bound;
  bound.leaves.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ag::Tensor& t = params.tensor(i);
    ag::Var leaf = tape.leaf(t.reshaped(bound_shape(params.name(i), t.shape())), requires_grad);
    bound.leaves.push_back(leaf);
    bound.by_name.emplace(params.name(i), leaf);
  }
  return bound;
}

ag::Tensor leaf_grad_as_param(const ag::Tape& tape, ag::Var leaf, const ag::Tensor& param) {
  return tape.grad(leaf).reshaped(param.shape());
}

ag::Var ForwardPass::activation(const std::string& name) const {
  for (const auto& [n, v] : activations)
    if (n == name) return v;
  std::string known;
  for (const auto& [n, v] : activations) known += (known.empty() ? "" : ", ") + n;
  fail(ErrorKind::invalid_argument, "unknown layer '" + name + "'; retained layers: " + known);
}

std::vector<std::string> ForwardPass::activation_names() const {
  std::vector<std::string> names;
  for (const auto& [n, v] : activations) names.push_back(n);
  return names;
}

ForwardPass forward(const ModelConfig& cfg, const BoundParams& params, const GraphInputs& graph) {
  if (params.leaves.empty()) fail(ErrorKind::invalid_argument, "forward: no parameters bound");
  ag::Tape& tape = *params.leaves.front().tape;
  ForwardPass pass;
  ag::Var x = tape.constant(graph.features);

  if (cfg.variant == Variant::spline_gat) {
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string name = "spline" + std::to_string(l + 1);
      layers::SplineConvParams sp{params[name + ".weight"], std::nullopt, params[name + ".bias"]};
      if (cfg.root_weight) sp.root = params[name + ".root"];
      x = ag::relu(layers::spline_conv_forward(graph.spline, x, sp));
      pass.activations.emplace_back(name, x);
    }
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string name = "gat" + std::to_string(l + 1);
      std::vector<layers::GatHeadParams> heads;
      for (std::size_t k = 0; k < cfg.gat_heads[l]; ++k) {
        heads.push_back({params[head_name(name, k, "weight")], params[head_name(name, k, "attention")]});
      }
      layers::GatOptions opts;
      opts.combine = l == 0 ? cfg.first_combine : layers::HeadCombine::average;
      opts.leaky_slope = cfg.leaky_slope;
      opts.self_loops = cfg.self_loops;
      x = layers::gat_forward(graph.attention, x, heads, opts).out;
      pass.activations.emplace_back(name, x);
    }
  } else {
    for (std::size_t l = 0; l < 2; ++l) {
      const std::string name = "gcn" + std::to_string(l + 1);
      x = layers::gcn_forward(graph.gcn_adjacency, x, params[name + ".weight"]);
      pass.activations.emplace_back(name, x);
    }
  }

  ag::Var pooled = layers::global_mean_pool(x);
  const layers::LinearParams mlp[] = {{params["mlp.0.weight"], params["mlp.0.bias"]},
                                      {params["mlp.1.weight"], params["mlp.1.bias"]}};
  pass.logits = layers::mlp_forward(pooled, mlp);
  return pass;
}

ag::Tensor predict_logits(const Model& model, const GraphInputs& graph) {
  ag::Tape tape;
  const BoundParams bound = bind_params(tape, model.params, false);
  return forward(model.config, bound, graph).logits.value();
}

std::size_t argmax(const ag::Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c)
    if (logits[c] > logits[best]) best = c;
  return best;
}

}  // namespace pathgraph::train
