#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathgraph::graphio {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Directed edge; messages flow from `src` into `dst`.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

/// One slide as a graph of patches. Coordinates are patch-grid positions,
/// features are stored as float32 (the on-disk precision) row-major N x d.
struct PatchGraph {
  std::string id;
  std::size_t label = 0;
  std::vector<Point> coords;
  std::size_t feature_dim = 0;
  std::vector<float> features;
  EdgeList edges;
  /// Planted-region ground truth, synthetic data only.
  std::optional<std::vector<bool>> region_mask;
  std::optional<int> patch_size;

  std::size_t num_nodes() const noexcept { return coords.size(); }
  std::span<const float> feature_row(std::size_t v) const {
    return std::span<const float>(features).subspan(v * feature_dim, feature_dim);
  }

  friend bool operator==(const PatchGraph&, const PatchGraph&) = default;
};

/// Throws Error(invalid_input) describing the first violated invariant:
/// N >= 1, edge indices in range, no self loops, no duplicates, symmetric
/// edge set, finite coordinates and features, feature length N * d.
void validate(const PatchGraph& graph);

/// Per-edge relative position u(i, j) = |p_j - p_i| / norm_const, in the
/// order of the graph's edge list.
struct PseudoCoords {
  std::vector<std::array<double, 2>> u;
  double norm_const = 1.0;
  friend bool operator==(const PseudoCoords&, const PseudoCoords&) = default;
};

PseudoCoords compute_pseudo_coords(const PatchGraph& graph);
PseudoCoords compute_pseudo_coords(std::span<const Point> coords, const EdgeList& edges);

enum class Split { train, val, test };

std::string to_string(Split split);
Split parse_split(const std::string& text);

struct Dataset {
  std::string name;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<PatchGraph> graphs;
  std::vector<Split> splits;

  std::vector<std::size_t> indices(Split split) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks shared feature_dim, label range, and one split tag per graph.
void validate(const Dataset& dataset);

}  // namespace pathgraph::graphio
