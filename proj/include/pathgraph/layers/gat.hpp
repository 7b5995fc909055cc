#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pathgraph/autograd/ops.hpp"
#include "pathgraph/graphio/graph.hpp"

namespace pathgraph::layers {

enum class HeadCombine { average, concat };

std::string to_string(HeadCombine mode);
HeadCombine parse_head_combine(const std::string& text);

struct GatOptions {
  HeadCombine combine = HeadCombine::average;
  double leaky_slope = ag::kDefaultLeakySlope;
  /// Include i in its own neighbourhood.
  bool self_loops = true;
};

/// Message-passing edges used by attention layers: graph edges followed by
/// one self loop per node when requested. Softmax segments are `dst`.
struct AttentionEdges {
  std::size_t num_nodes = 0;
  ag::Index src;
  ag::Index dst;
};

AttentionEdges build_attention_edges(const graphio::EdgeList& edges, std::size_t num_nodes, bool self_loops);

/// Per-head trainable tensors: weight d_in x d_head, attention 2*d_head x 1
/// (first half scores the receiving node, second half the sender).
struct GatHeadParams {
  ag::Var weight;
  ag::Var attention;
};

struct GatOutput {
  ag::Var out;
  /// Per head, one coefficient per attention edge (E x 1).
  std::vector<ag::Var> alpha;
};

/// Multi-head graph attention: per head, e_ij = LeakyReLU(a^T [W x_i || W x_j]),
/// alpha_ij = softmax over the neighbourhood of i, h_i = sum_j alpha_ij W x_j;
/// heads are averaged or concatenated, then ReLU is applied.
GatOutput gat_forward(const AttentionEdges& edges, ag::Var features, std::span<const GatHeadParams> heads,
                      const GatOptions& options);

}  // namespace pathgraph::layers
