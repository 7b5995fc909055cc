#pragma once

#include <cstddef>
#include <cstdint>

#include "pathgraph/graphio/graph.hpp"
#include "pathgraph/graphio/knn.hpp"

namespace pathgraph::graphio {

struct SynthConfig {
  std::size_t num_graphs = 200;
  std::size_t num_classes = 5;
  std::size_t feature_dim = 64;
  std::size_t grid_w = 12;
  std::size_t grid_h = 12;
  double region_frac = 0.25;
  double noise_sigma = 0.5;
  std::uint64_t seed = 7;
  std::size_t k = kDefaultNeighbors;
  double train_frac = 0.70;
  double val_frac = 0.15;
};

/// Amplitude added to channel `label` inside the planted region.
inline constexpr double kClassSignal = 2.0;

/// Throws Error(invalid_argument) naming the offending field.
void validate(const SynthConfig& cfg);

/// Number of planted-region nodes for a grid of `num_nodes` patches.
std::size_t planted_region_size(const SynthConfig& cfg);

/// Grid-of-patches graphs with a contiguous planted region whose features
/// carry the class signature, plus Gaussian noise everywhere. Labels cycle
/// through the classes; splits are stratified per class. Graph g draws from
/// its own stream seeded with seed + g, so output is a pure function of cfg.
Dataset synth_dataset(const SynthConfig& cfg);

}  // namespace pathgraph::graphio
