#include "pathgraph/layers/gat.hpp"

#include "pathgraph/error.hpp"

namespace pathgraph::layers {

std::string to_string(HeadCombine mode) { return mode == HeadCombine::average ? "average" : "concat"; }

HeadCombine parse_head_combine(const std::string& text) {
  if (text == "average") return HeadCombine::average;
  if (text == "concat") return HeadCombine::concat;
  fail(ErrorKind::config, "unknown head combine mode '" + text + "'");
}

AttentionEdges build_attention_edges(const graphio::EdgeList& edges, std::size_t num_nodes, bool self_loops) {
  AttentionEdges out;
  out.num_nodes = num_nodes;
  out.src.reserve(edges.size() + num_nodes);
  out.dst.reserve(edges.size() + num_nodes);
  for (const auto& e : edges) {
    if (e.src >= num_nodes || e.dst >= num_nodes) fail(ErrorKind::index, "attention edges: edge outside node range");
    out.src.push_back(e.src);
    out.dst.push_back(e.dst);
  }
  if (self_loops) {
    for (std::size_t v = 0; v < num_nodes; ++v) {
      out.src.push_back(v);
      out.dst.push_back(v);
    }
  }
  return out;
}

GatOutput gat_forward(const AttentionEdges& edges, ag::Var features, std::span<const GatHeadParams> heads,
                      const GatOptions& options) {
  if (heads.empty()) fail(ErrorKind::config, "gat: at least one head required");
  if (features.rows() != edges.num_nodes) {
    fail(ErrorKind::shape, "gat: features " + ag::shape_string(features.shape()) + " for " +
                               std::to_string(edges.num_nodes) + " nodes");
  }

  GatOutput result;
  std::vector<ag::Var> head_out;
  for (const GatHeadParams& head : heads) {
    if (head.attention.rows() != 2 * head.weight.cols() || head.attention.cols() != 1) {
      fail(ErrorKind::shape, "gat: attention vector " + ag::shape_string(head.attention.shape()) +
                                 " does not match head width " + std::to_string(head.weight.cols()));
    }
    ag::Var h = ag::matmul(features, head.weight);
    const ag::Var pair[] = {ag::gather_rows(h, edges.dst), ag::gather_rows(h, edges.src)};
    ag::Var logits = ag::leaky_relu(ag::matmul(ag::concat_cols(pair), head.attention), options.leaky_slope);
    ag::Var alpha = ag::segment_softmax(logits, edges.dst, edges.num_nodes);
    ag::Var messages = ag::row_scale(pair[1], alpha);
    head_out.push_back(ag::scatter_add_rows(messages, edges.dst, edges.num_nodes));
    result.alpha.push_back(alpha);
  }

  ag::Var combined = head_out[0];
  if (head_out.size() > 1) {
    if (options.combine == HeadCombine::concat) {
      combined = ag::concat_cols(head_out);
    } else {
      for (std::size_t k = 1; k < head_out.size(); ++k) combined = ag::add(combined, head_out[k]);
      combined = ag::scale(combined, 1.0 / double(head_out.size()));
    }
  }
  result.out = ag::relu(combined);
  return result;
}

}  // namespace pathgraph::layers
