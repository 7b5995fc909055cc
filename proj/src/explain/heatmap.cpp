#include "pathgraph/explain/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pathgraph/error.hpp"

namespace pathgraph::explain {
namespace {

void check_lengths(std::size_t scores, std::size_t coords) {
  if (scores != coords) {
    fail(ErrorKind::invalid_argument, "saliency has " + std::to_string(scores) + " scores but graph has " +
                                          std::to_string(coords) + " coordinates");
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

}  // namespace

GridLayout grid_layout(std::span<const graphio::Point> coords, double step) {
  if (!(step > 0.0)) fail(ErrorKind::invalid_argument, "grid step must be positive");
  GridLayout layout;
  if (coords.empty()) return layout;
  double min_x = coords[0].x, min_y = coords[0].y;
  for (const auto& p : coords) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
  }
  for (const auto& p : coords) {
    const auto cx = static_cast<std::size_t>(std::llround((p.x - min_x) / step));
    const auto cy = static_cast<std::size_t>(std::llround((p.y - min_y) / step));
    layout.ix.push_back(cx);
    layout.iy.push_back(cy);
    layout.width = std::max(layout.width, cx + 1);
    layout.height = std::max(layout.height, cy + 1);
  }
  return layout;
}

Image rasterize(std::span<const double> scores_norm, const GridLayout& layout, std::size_t cell) {
  check_lengths(scores_norm.size(), layout.ix.size());
  if (cell == 0) fail(ErrorKind::invalid_argument, "cell size must be positive");
  Image img;
  img.width = layout.width * cell;
  img.height = layout.height * cell;
  img.rgb.assign(img.width * img.height * 3, 0);
  for (std::size_t n = 0; n < scores_norm.size(); ++n) {
    const double s = std::clamp(scores_norm[n], 0.0, 1.0);
    const auto r = static_cast<std::uint8_t>(std::lround(128.0 + 127.0 * s));
    const auto gb = static_cast<std::uint8_t>(std::lround(128.0 * (1.0 - s)));
    for (std::size_t py = layout.iy[n] * cell; py < (layout.iy[n] + 1) * cell; ++py) {
      for (std::size_t px = layout.ix[n] * cell; px < (layout.ix[n] + 1) * cell; ++px) {
        std::uint8_t* pix = &img.rgb[(py * img.width + px) * 3];
        pix[0] = r;
        pix[1] = gb;
        pix[2] = gb;
      }
    }
  }
  return img;
}

std::string heatmap_csv(const NodeSaliency& saliency, std::span<const graphio::Point> coords) {
  check_lengths(saliency.scores_raw.size(), coords.size());
  std::string out = "node_id,x,y,score_raw,score_norm\n";
  for (std::size_t n = 0; n < coords.size(); ++n) {
    out += std::to_string(n) + ',' + fmt17(coords[n].x) + ',' + fmt17(coords[n].y) + ',' +
           fmt17(saliency.scores_raw[n]) + ',' + fmt17(saliency.scores_norm[n]) + '\n';
  }
  return out;
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + ' ' + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

HeatmapPaths render_heatmap(const NodeSaliency& saliency, const graphio::PatchGraph& graph,
                            const std::filesystem::path& prefix, std::size_t cell) {
  check_lengths(saliency.scores_raw.size(), graph.coords.size());
  const double step = graph.patch_size ? double(*graph.patch_size) : 1.0;
  const GridLayout layout = grid_layout(graph.coords, step);
  HeatmapPaths paths{prefix, prefix};
  paths.csv += ".csv";
  paths.ppm += ".ppm";
  write_bytes(paths.csv, heatmap_csv(saliency, graph.coords));
  write_bytes(paths.ppm, encode_ppm(rasterize(saliency.scores_norm, layout, cell)));
  return paths;
}

}  // namespace pathgraph::explain
