#pragma once

#include <cstddef>
#include <span>

#include "pathgraph/graphio/graph.hpp"

namespace pathgraph::graphio {

inline constexpr std::size_t kDefaultNeighbors = 8;

/// Exact k-nearest-neighbour edges by Euclidean distance, ties broken by
/// lower node index, then symmetrised and deduplicated. Returned sorted by
/// (src, dst).
EdgeList knn_build_edges(std::span<const Point> coords, std::size_t k);

}  // namespace pathgraph::graphio
