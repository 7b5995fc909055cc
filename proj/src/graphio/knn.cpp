#include "pathgraph/graphio/knn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pathgraph/error.hpp"

namespace pathgraph::graphio {

// Brute force over all pairs; patch graphs are a few thousand nodes at most,
// where this beats building a spatial index.
EdgeList knn_build_edges(std::span<const Point> coords, std::size_t k) {
  if (k == 0) fail(ErrorKind::invalid_argument, "knn: k must be positive");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i].x) || !std::isfinite(coords[i].y)) {
      fail(ErrorKind::invalid_input, "knn: non-finite coordinate at node " + std::to_string(i));
    }
  }

  const std::size_t n = coords.size();
  const std::size_t take = std::min(k, n == 0 ? 0 : n - 1);
  EdgeList edges;
  edges.reserve(2 * n * take);

  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = coords[j].x - coords[i].x;
      const double dy = coords[j].y - coords[i].y;
      candidates.emplace_back(dx * dx + dy * dy, j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end());
    for (std::size_t r = 0; r < take; ++r) {
      edges.push_back({i, candidates[r].second});
      edges.push_back({candidates[r].second, i});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace pathgraph::graphio
