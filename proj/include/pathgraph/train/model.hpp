#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pathgraph/autograd/tape.hpp"
#include "pathgraph/graphio/graph.hpp"
#include "pathgraph/layers/gat.hpp"
#include "pathgraph/layers/spline_conv.hpp"

namespace pathgraph::train {

enum class Variant { spline_gat, gcn_baseline };

std::string to_string(Variant variant);
Variant parse_variant(const std::string& text);

/// Architecture. Defaults: two 128-wide spline convolutions (degree 1,
/// 5 x 5 kernel), GAT with 4 averaged heads then 1 head (128 wide), and an
/// MLP 128 -> 64 -> C. The GCN baseline swaps the spline and attention
/// stack for two GCN layers of `gcn_dims`.
struct ModelConfig {
  std::size_t d_in = 64;
  std::size_t num_classes = 5;
  Variant variant = Variant::spline_gat;

  std::array<std::size_t, 2> spline_dims{128, 128};
  layers::SplineKernelShape kernel{};
  bool root_weight = true;

  std::array<std::size_t, 2> gat_dims{128, 128};
  std::array<std::size_t, 2> gat_heads{4, 1};
  layers::HeadCombine first_combine = layers::HeadCombine::average;
  bool self_loops = true;
  double leaky_slope = ag::kDefaultLeakySlope;

  std::array<std::size_t, 2> gcn_dims{128, 128};

  std::size_t mlp_hidden = 64;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws Error(config) when dimensions do not chain.
void validate(const ModelConfig& cfg);

/// Width of the node features entering global pooling.
std::size_t pooled_dim(const ModelConfig& cfg);

/// Ordered name -> tensor registry. Shapes are the logical ones
/// (e.g. spline kernels P x d_in x d_out, biases d_out).
class ParamStore {
 public:
  void add(std::string name, ag::Tensor value);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  ag::Tensor& at(const std::string& name);
  const ag::Tensor& at(const std::string& name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t num_scalars() const noexcept;
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  ag::Tensor& tensor(std::size_t i) { return entries_[i].second; }
  const ag::Tensor& tensor(std::size_t i) const { return entries_[i].second; }

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, ag::Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

struct Model {
  ModelConfig config;
  ParamStore params;
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)) (per kernel element for
/// spline kernels), biases and attention vectors zero. Values are rounded to
/// float32 so a fresh model checkpoints exactly. Deterministic in cfg.seed.
Model build_model(const ModelConfig& cfg);

/// Per-graph constants derived once: float features widened to double,
/// spline aggregation operator, attention edges, GCN adjacency.
struct GraphInputs {
  std::size_t num_nodes = 0;
  std::size_t label = 0;
  ag::Tensor features;
  layers::SplineAggregation spline;
  layers::AttentionEdges attention;
  ag::SparseMatrix gcn_adjacency;
};

GraphInputs prepare_graph(const graphio::PatchGraph& graph, const ModelConfig& cfg);

/// Parameters as tape leaves, reshaped to the rank-2 forms the layers use.
struct BoundParams {
  std::vector<ag::Var> leaves;  // in ParamStore order
  std::map<std::string, ag::Var> by_name;

  ag::Var operator[](const std::string& name) const;
};

BoundParams bind_params(ag::Tape& tape, const ParamStore& params, bool requires_grad);

/// Folds the gradient of a bound leaf back to the logical parameter shape.
ag::Tensor leaf_grad_as_param(const ag::Tape& tape, ag::Var leaf, const ag::Tensor& param);

struct ForwardPass {
  ag::Var logits;  // 1 x C
  /// Node activations in forward order, e.g. spline1, spline2, gat1, gat2.
  std::vector<std::pair<std::string, ag::Var>> activations;

  ag::Var activation(const std::string& name) const;
  std::vector<std::string> activation_names() const;
};

ForwardPass forward(const ModelConfig& cfg, const BoundParams& params, const GraphInputs& graph);

/// Logits without recording gradients.
ag::Tensor predict_logits(const Model& model, const GraphInputs& graph);

/// Argmax with ties to the lower class index.
std::size_t argmax(const ag::Tensor& logits);

}  // namespace pathgraph::train
