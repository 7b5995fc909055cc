#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pathgraph/explain/gradcam.hpp"
#include "pathgraph/graphio/graph.hpp"

namespace pathgraph::explain {

inline constexpr std::size_t kDefaultCellPixels = 8;

/// Grid placement of nodes: cell (ix, iy) = (coord - min) / step, where
/// step is the patch size when known and 1 otherwise.
struct GridLayout {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::size_t> ix;
  std::vector<std::size_t> iy;
};

GridLayout grid_layout(std::span<const graphio::Point> coords, double step = 1.0);

/// RGB raster, row-major, 3 bytes per pixel.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
};

/// Background black; each node paints its cell with a ramp from gray
/// (128,128,128) at score 0 to red (255,0,0) at score 1.
Image rasterize(std::span<const double> scores_norm, const GridLayout& layout, std::size_t cell = kDefaultCellPixels);

std::string heatmap_csv(const NodeSaliency& saliency, std::span<const graphio::Point> coords);
std::string encode_ppm(const Image& image);

struct HeatmapPaths {
  std::filesystem::path csv;
  std::filesystem::path ppm;
};

/// Writes <prefix>.csv and <prefix>.ppm. Throws Error(invalid_argument)
/// when coords and scores differ in length.
HeatmapPaths render_heatmap(const NodeSaliency& saliency, const graphio::PatchGraph& graph,
                            const std::filesystem::path& prefix, std::size_t cell = kDefaultCellPixels);

}  // namespace pathgraph::explain
