#include "pathgraph/layers/gcn.hpp"

#include <cmath>
#include <vector>

#include "pathgraph/error.hpp"

namespace pathgraph::layers {

ag::SparseMatrix build_gcn_adjacency(const graphio::EdgeList& edges, std::size_t num_nodes, bool self_loops) {
  std::vector<double> degree(num_nodes, self_loops ? 1.0 : 0.0);
  for (const auto& e : edges) {
    if (e.src >= num_nodes || e.dst >= num_nodes) fail(ErrorKind::index, "gcn: edge outside node range");
    degree[e.dst] += 1.0;
  }
  ag::SparseMatrix adj;
  adj.rows = num_nodes;
  adj.cols = num_nodes;
  adj.entries.reserve(edges.size() + (self_loops ? num_nodes : 0));
  for (const auto& e : edges) {
    adj.entries.push_back({e.dst, e.src, 1.0 / std::sqrt(degree[e.dst] * degree[e.src])});
  }
  if (self_loops) {
    for (std::size_t v = 0; v < num_nodes; ++v) adj.entries.push_back({v, v, 1.0 / degree[v]});
  }
  return adj;
}

ag::Var gcn_forward(const ag::SparseMatrix& adjacency, ag::Var features, ag::Var weight) {
  if (features.rows() != adjacency.cols) {
    fail(ErrorKind::shape, "gcn: features " + ag::shape_string(features.shape()) + " for " +
                               std::to_string(adjacency.cols) + " nodes");
  }
  return ag::relu(ag::spmm(adjacency, ag::matmul(features, weight)));
}

}  // namespace pathgraph::layers
