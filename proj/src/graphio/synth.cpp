#include "pathgraph/graphio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pathgraph/error.hpp"

namespace pathgraph::graphio {
namespace {

struct Rect {
  std::size_t w;
  std::size_t h;
};

Rect region_shape(std::size_t count, std::size_t grid_w, std::size_t grid_h) {
  std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(double(count)))), 1, grid_w);
  std::size_t h = (count + w - 1) / w;
  if (h > grid_h) {
    w = (count + grid_h - 1) / grid_h;
    h = (count + w - 1) / w;
  }
  return {w, h};
}

std::string graph_id(std::uint64_t seed, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "synth-s%llu-g%04zu", static_cast<unsigned long long>(seed), index);
  return buf;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorKind::invalid_argument, "synth: " + what); };
  if (cfg.num_graphs < 1) bad("num_graphs must be >= 1");
  if (cfg.num_classes < 2) bad("num_classes must be >= 2");
  if (cfg.feature_dim < 2) bad("feature_dim must be >= 2");
  if (cfg.feature_dim < cfg.num_classes) bad("feature_dim must be >= num_classes (class c marks channel c)");
  if (cfg.grid_w < 4 || cfg.grid_h < 4) bad("grid dimensions must be >= 4");
  if (!(cfg.region_frac > 0.0 && cfg.region_frac < 1.0)) bad("region_frac must lie in (0, 1)");
  if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) bad("noise_sigma must be finite and >= 0");
  if (cfg.k < 1) bad("k must be >= 1");
  if (!(cfg.train_frac > 0.0) || !(cfg.val_frac >= 0.0) || cfg.train_frac + cfg.val_frac > 1.0) {
    bad("split fractions must satisfy train > 0, val >= 0, train + val <= 1");
  }
}

std::size_t planted_region_size(const SynthConfig& cfg) {
  const std::size_t n = cfg.grid_w * cfg.grid_h;
  const auto count = static_cast<std::size_t>(std::lround(cfg.region_frac * double(n)));
  return std::clamp<std::size_t>(count, 1, n - 1);
}

Dataset synth_dataset(const SynthConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.grid_w * cfg.grid_h;
  const std::size_t region = planted_region_size(cfg);
  const Rect rect = region_shape(region, cfg.grid_w, cfg.grid_h);

  std::vector<Point> coords(n);
  for (std::size_t row = 0; row < cfg.grid_h; ++row)
    for (std::size_t col = 0; col < cfg.grid_w; ++col)
      coords[row * cfg.grid_w + col] = {double(col), double(row)};
  const EdgeList edges = knn_build_edges(coords, cfg.k);

  Dataset ds;
  ds.name = "synth-s" + std::to_string(cfg.seed);
  ds.num_classes = cfg.num_classes;
  ds.feature_dim = cfg.feature_dim;
  ds.graphs.reserve(cfg.num_graphs);

  for (std::size_t g = 0; g < cfg.num_graphs; ++g) {
    std::mt19937_64 rng(cfg.seed + g);
    PatchGraph graph;
    graph.id = graph_id(cfg.seed, g);
    graph.label = g % cfg.num_classes;
    graph.coords = coords;
    graph.edges = edges;
    graph.feature_dim = cfg.feature_dim;

    std::uniform_int_distribution<std::size_t> pick_x(0, cfg.grid_w - rect.w);
    std::uniform_int_distribution<std::size_t> pick_y(0, cfg.grid_h - rect.h);
    const std::size_t x0 = pick_x(rng);
    const std::size_t y0 = pick_y(rng);
    std::vector<bool> mask(n, false);
    for (std::size_t k = 0; k < region; ++k) {
      mask[(y0 + k / rect.w) * cfg.grid_w + x0 + k % rect.w] = true;
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    graph.features.resize(n * cfg.feature_dim);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < cfg.feature_dim; ++c) {
        double value = cfg.noise_sigma * noise(rng);
        if (mask[v] && c == graph.label) value += kClassSignal;
        graph.features[v * cfg.feature_dim + c] = static_cast<float>(value);
      }
    }
    graph.region_mask = std::move(mask);
    ds.graphs.push_back(std::move(graph));
  }

  ds.splits.assign(cfg.num_graphs, Split::test);
  std::mt19937_64 split_rng(cfg.seed);
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t g = c; g < cfg.num_graphs; g += cfg.num_classes) members.push_back(g);
    std::shuffle(members.begin(), members.end(), split_rng);
    const auto n_train = static_cast<std::size_t>(std::lround(cfg.train_frac * double(members.size())));
    const auto n_val = static_cast<std::size_t>(std::lround(cfg.val_frac * double(members.size())));
    for (std::size_t r = 0; r < members.size(); ++r) {
      ds.splits[members[r]] = r < n_train ? Split::train : (r < n_train + n_val ? Split::val : Split::test);
    }
  }
  return ds;
}

}  // namespace pathgraph::graphio
