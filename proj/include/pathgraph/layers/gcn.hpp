#pragma once

#include <cstddef>

#include "pathgraph/autograd/ops.hpp"
#include "pathgraph/graphio/graph.hpp"

namespace pathgraph::layers {

/// Symmetrically normalised adjacency: entry (i, j) = 1 / sqrt(|N(i)| |N(j)|)
/// for every edge j -> i, degrees counted over in-edges (plus self loops
/// when requested).
ag::SparseMatrix build_gcn_adjacency(const graphio::EdgeList& edges, std::size_t num_nodes, bool self_loops = true);

/// x'_i = ReLU(sum_j W^T x_j / sqrt(|N(j)| |N(i)|)).
ag::Var gcn_forward(const ag::SparseMatrix& adjacency, ag::Var features, ag::Var weight);

}  // namespace pathgraph::layers
