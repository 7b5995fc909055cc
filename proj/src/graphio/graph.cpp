#include "pathgraph/graphio/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pathgraph/error.hpp"

namespace pathgraph::graphio {
namespace {

std::string edge_name(std::size_t k, const Edge& e) {
  return "edge " + std::to_string(k) + " (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")";
}

}  // namespace

void validate(const PatchGraph& graph) {
  const std::size_t n = graph.num_nodes();
  const std::string where = "graph '" + graph.id + "': ";
  if (n == 0) fail(ErrorKind::invalid_input, where + "graph has no nodes");
  if (graph.feature_dim == 0) fail(ErrorKind::invalid_input, where + "feature_dim is 0");
  if (graph.features.size() != n * graph.feature_dim) {
    fail(ErrorKind::invalid_input, where + "expected " + std::to_string(n * graph.feature_dim) +
                                       " feature values, found " + std::to_string(graph.features.size()));
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!std::isfinite(graph.coords[v].x) || !std::isfinite(graph.coords[v].y)) {
      fail(ErrorKind::invalid_input, where + "non-finite coordinate at node " + std::to_string(v));
    }
  }
  for (std::size_t i = 0; i < graph.features.size(); ++i) {
    if (!std::isfinite(graph.features[i])) {
      fail(ErrorKind::invalid_input, where + "non-finite feature at node " + std::to_string(i / graph.feature_dim) +
                                         ", channel " + std::to_string(i % graph.feature_dim));
    }
  }
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const Edge& e = graph.edges[k];
    if (e.src >= n || e.dst >= n) {
      fail(ErrorKind::invalid_input, where + edge_name(k, e) + " has index outside [0, " + std::to_string(n) + ")");
    }
    if (e.src == e.dst) fail(ErrorKind::invalid_input, where + edge_name(k, e) + " is a self loop");
  }
  EdgeList sorted = graph.edges;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k] == sorted[k - 1]) fail(ErrorKind::invalid_input, where + "duplicate " + edge_name(k, sorted[k]));
  }
  for (const Edge& e : sorted) {
    if (!std::binary_search(sorted.begin(), sorted.end(), Edge{e.dst, e.src})) {
      fail(ErrorKind::invalid_input, where + "edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                                         ") has no reverse edge");
    }
  }
  if (graph.region_mask && graph.region_mask->size() != n) {
    fail(ErrorKind::invalid_input, where + "region mask length " + std::to_string(graph.region_mask->size()) +
                                       " does not match node count " + std::to_string(n));
  }
}

PseudoCoords compute_pseudo_coords(std::span<const Point> coords, const EdgeList& edges) {
  PseudoCoords out;
  out.u.reserve(edges.size());
  double largest = 0.0;
  for (const Edge& e : edges) {
    if (e.src >= coords.size() || e.dst >= coords.size()) {
      fail(ErrorKind::invalid_input, "pseudo coordinates: edge index outside node range");
    }
    const double dx = std::abs(coords[e.dst].x - coords[e.src].x);
    const double dy = std::abs(coords[e.dst].y - coords[e.src].y);
    largest = std::max({largest, dx, dy});
    out.u.push_back({dx, dy});
  }
  out.norm_const = largest > 0.0 ? largest : 1.0;
  for (auto& u : out.u) {
    u[0] /= out.norm_const;
    u[1] /= out.norm_const;
  }
  return out;
}

PseudoCoords compute_pseudo_coords(const PatchGraph& graph) {
  validate(graph);
  return compute_pseudo_coords(graph.coords, graph.edges);
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  fail(ErrorKind::invalid_argument, "unknown split '" + text + "' (expected train, val or test)");
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split) out.push_back(i);
  return out;
}

void validate(const Dataset& dataset) {
  if (dataset.num_classes < 1) fail(ErrorKind::invalid_input, "dataset '" + dataset.name + "' has no classes");
  if (dataset.splits.size() != dataset.graphs.size()) {
    fail(ErrorKind::invalid_input, "dataset '" + dataset.name + "': " + std::to_string(dataset.splits.size()) +
                                       " split tags for " + std::to_string(dataset.graphs.size()) + " graphs");
  }
  for (const PatchGraph& g : dataset.graphs) {
    if (g.feature_dim != dataset.feature_dim) {
      fail(ErrorKind::invalid_input, "graph '" + g.id + "' has feature_dim " + std::to_string(g.feature_dim) +
                                         ", dataset expects " + std::to_string(dataset.feature_dim));
    }
    if (g.label >= dataset.num_classes) {
      fail(ErrorKind::invalid_input, "graph '" + g.id + "' has label " + std::to_string(g.label) + " >= " +
                                         std::to_string(dataset.num_classes) + " classes");
    }
  }
}

}  // namespace pathgraph::graphio
