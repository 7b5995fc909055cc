#pragma once

#include <filesystem>
#include <string>

#include "pathgraph/graphio/graph.hpp"

namespace pathgraph::graphio {

inline constexpr int kGraphFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;

struct GraphSaveOptions {
  /// Write features to a sibling `<stem>.f32` blob referenced by
  /// "features_file" instead of embedding them as base64.
  bool external_features = false;
};

/// PGX graph files (`.pgx.json`). Round trips are bit exact, including the
/// float32 feature bytes.
void save_graph(const PatchGraph& graph, const std::filesystem::path& path, const GraphSaveOptions& options = {});
PatchGraph load_graph(const std::filesystem::path& path);

/// Serialises with features embedded; `base_dir` resolves "features_file".
std::string graph_to_json(const PatchGraph& graph);
PatchGraph graph_from_json(const std::string& text, const std::filesystem::path& base_dir = ".",
                           const std::string& source = "<memory>");

/// Writes `<dir>/<graph id>.pgx.json` for every graph plus the manifest at
/// `manifest_path` (`.pgxset.json`) referencing them by relative path.
void save_dataset(const Dataset& dataset, const std::filesystem::path& manifest_path);
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Raw little-endian float32 blob helpers shared with the CLI.
std::vector<float> read_f32_file(const std::filesystem::path& path);
void write_f32_file(const std::filesystem::path& path, std::span<const float> values);

}  // namespace pathgraph::graphio
