#include "pathgraph/graphio/graph_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "pathgraph/error.hpp"
#include "pathgraph/graphio/base64.hpp"

namespace pathgraph::graphio {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::vector<std::uint8_t> floats_to_le_bytes(std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return bytes;
}

std::vector<float> le_bytes_to_floats(std::span<const std::uint8_t> bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, source + ": " + e.what() + " (byte offset " + std::to_string(e.byte) + ")");
  }
}

const json& field(const json& obj, const char* name, const std::string& source) {
  auto it = obj.find(name);
  if (it == obj.end()) fail(ErrorKind::parse, source + ": missing field \"" + std::string(name) + "\"");
  return *it;
}

template <class T>
T get_as(const json& value, const char* name, const std::string& source) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, source + ": field \"" + std::string(name) + "\": " + e.what());
  }
}

void check_version(const json& doc, int expected, const std::string& source) {
  const int version = get_as<int>(field(doc, "version", source), "version", source);
  if (version != expected) {
    fail(ErrorKind::unsupported_version, source + ": unsupported format version " + std::to_string(version) +
                                             " (this build reads version " + std::to_string(expected) + ")");
  }
}

std::vector<bool> decode_mask(const std::string& text, std::size_t n, const std::string& source) {
  const auto bytes = base64_decode(text);
  const std::size_t expected = (n + 7) / 8;
  if (bytes.size() != expected) {
    fail(ErrorKind::parse, source + ": region_mask holds " + std::to_string(bytes.size()) + " bytes, expected " +
                               std::to_string(expected));
  }
  std::vector<bool> mask(n);
  for (std::size_t v = 0; v < n; ++v) mask[v] = (bytes[v / 8] >> (v % 8)) & 1u;
  return mask;
}

std::string encode_mask(const std::vector<bool>& mask) {
  std::vector<std::uint8_t> bytes((mask.size() + 7) / 8, 0);
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) bytes[v / 8] |= static_cast<std::uint8_t>(1u << (v % 8));
  return base64_encode(bytes);
}

json graph_json(const PatchGraph& graph) {
  json doc;
  doc["version"] = kGraphFormatVersion;
  doc["id"] = graph.id;
  doc["label"] = graph.label;
  doc["num_nodes"] = graph.num_nodes();
  doc["feature_dim"] = graph.feature_dim;
  json coords = json::array();
  for (const Point& p : graph.coords) coords.push_back({p.x, p.y});
  doc["coords"] = std::move(coords);
  json edges = json::array();
  for (const Edge& e : graph.edges) edges.push_back({e.src, e.dst});
  doc["edges"] = std::move(edges);
  if (graph.region_mask) doc["region_mask"] = encode_mask(*graph.region_mask);
  if (graph.patch_size) doc["patch_size"] = *graph.patch_size;
  return doc;
}

PatchGraph graph_from_doc(const json& doc, const fs::path& base_dir, const std::string& source) {
  if (!doc.is_object()) fail(ErrorKind::parse, source + ": top level is not a JSON object");
  check_version(doc, kGraphFormatVersion, source);

  PatchGraph g;
  g.id = get_as<std::string>(field(doc, "id", source), "id", source);
  g.label = get_as<std::size_t>(field(doc, "label", source), "label", source);
  const auto n = get_as<std::size_t>(field(doc, "num_nodes", source), "num_nodes", source);
  g.feature_dim = get_as<std::size_t>(field(doc, "feature_dim", source), "feature_dim", source);

  const json& coords = field(doc, "coords", source);
  if (!coords.is_array() || coords.size() != n) {
    fail(ErrorKind::parse, source + ": \"coords\" must be an array of " + std::to_string(n) + " [x, y] pairs");
  }
  g.coords.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto xy = get_as<std::array<double, 2>>(coords[v], "coords", source);
    g.coords.push_back({xy[0], xy[1]});
  }

  const json& edges = field(doc, "edges", source);
  if (!edges.is_array()) fail(ErrorKind::parse, source + ": \"edges\" must be an array");
  g.edges.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto ij = get_as<std::array<std::size_t, 2>>(edges[k], "edges", source);
    if (ij[0] >= n || ij[1] >= n) {
      fail(ErrorKind::parse, source + ": edge " + std::to_string(k) + " (" + std::to_string(ij[0]) + ", " +
                                 std::to_string(ij[1]) + ") references a node outside [0, " + std::to_string(n) + ")");
    }
    g.edges.push_back({ij[0], ij[1]});
  }

  std::vector<std::uint8_t> blob;
  if (auto it = doc.find("features"); it != doc.end()) {
    blob = base64_decode(get_as<std::string>(*it, "features", source));
  } else if (auto file = doc.find("features_file"); file != doc.end()) {
    const fs::path blob_path = base_dir / get_as<std::string>(*file, "features_file", source);
    const std::string raw = read_text(blob_path);
    blob.assign(raw.begin(), raw.end());
  } else {
    fail(ErrorKind::parse, source + ": neither \"features\" nor \"features_file\" present");
  }
  const std::size_t expected = n * g.feature_dim * 4;
  if (blob.size() != expected) {
    fail(ErrorKind::parse, source + ": feature blob holds " + std::to_string(blob.size()) + " bytes, expected " +
                               std::to_string(expected) + " (" + std::to_string(n) + " x " +
                               std::to_string(g.feature_dim) + " float32)");
  }
  g.features = le_bytes_to_floats(blob);

  if (auto it = doc.find("region_mask"); it != doc.end()) {
    g.region_mask = decode_mask(get_as<std::string>(*it, "region_mask", source), n, source);
  }
  if (auto it = doc.find("patch_size"); it != doc.end()) g.patch_size = get_as<int>(*it, "patch_size", source);

  try {
    validate(g);
  } catch (const Error& e) {
    fail(ErrorKind::parse, source + ": " + e.what());
  }
  return g;
}

}  // namespace

std::string graph_to_json(const PatchGraph& graph) {
  validate(graph);
  json doc = graph_json(graph);
  doc["features"] = base64_encode(floats_to_le_bytes(graph.features));
  return doc.dump() + "\n";
}

PatchGraph graph_from_json(const std::string& text, const fs::path& base_dir, const std::string& source) {
  return graph_from_doc(parse_json(text, source), base_dir, source);
}

void save_graph(const PatchGraph& graph, const fs::path& path, const GraphSaveOptions& options) {
  if (!options.external_features) {
    write_text(path, graph_to_json(graph));
    return;
  }
  validate(graph);
  std::string stem = path.filename().string();
  if (auto pos = stem.find(".pgx.json"); pos != std::string::npos) stem.resize(pos);
  const std::string blob_name = stem + ".f32";
  write_f32_file(path.parent_path() / blob_name, graph.features);
  json doc = graph_json(graph);
  doc["features_file"] = blob_name;
  write_text(path, doc.dump() + "\n");
}

PatchGraph load_graph(const fs::path& path) {
  return graph_from_json(read_text(path), path.parent_path(), path.string());
}

void save_dataset(const Dataset& dataset, const fs::path& manifest_path) {
  validate(dataset);
  const fs::path dir = manifest_path.parent_path();
  json doc;
  doc["version"] = kDatasetFormatVersion;
  doc["name"] = dataset.name;
  doc["num_classes"] = dataset.num_classes;
  doc["feature_dim"] = dataset.feature_dim;
  json graphs = json::array();
  for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
    const std::string file = dataset.graphs[i].id + ".pgx.json";
    save_graph(dataset.graphs[i], dir / file);
    graphs.push_back({{"path", file}, {"split", to_string(dataset.splits[i])}});
  }
  doc["graphs"] = std::move(graphs);
  write_text(manifest_path, doc.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& manifest_path) {
  const std::string source = manifest_path.string();
  const json doc = parse_json(read_text(manifest_path), source);
  if (!doc.is_object()) fail(ErrorKind::parse, source + ": top level is not a JSON object");
  check_version(doc, kDatasetFormatVersion, source);

  Dataset ds;
  ds.name = get_as<std::string>(field(doc, "name", source), "name", source);
  ds.num_classes = get_as<std::size_t>(field(doc, "num_classes", source), "num_classes", source);
  ds.feature_dim = get_as<std::size_t>(field(doc, "feature_dim", source), "feature_dim", source);
  const json& graphs = field(doc, "graphs", source);
  if (!graphs.is_array()) fail(ErrorKind::parse, source + ": \"graphs\" must be an array");
  for (const json& entry : graphs) {
    const auto rel = get_as<std::string>(field(entry, "path", source), "path", source);
    const auto split = get_as<std::string>(field(entry, "split", source), "split", source);
    ds.graphs.push_back(load_graph(manifest_path.parent_path() / rel));
    try {
      ds.splits.push_back(parse_split(split));
    } catch (const Error& e) {
      fail(ErrorKind::parse, source + ": " + e.what());
    }
  }
  validate(ds);
  return ds;
}

std::vector<float> read_f32_file(const fs::path& path) {
  const std::string raw = read_text(path);
  if (raw.size() % 4 != 0) {
    fail(ErrorKind::parse, path.string() + ": size " + std::to_string(raw.size()) + " bytes is not a multiple of 4");
  }
  return le_bytes_to_floats(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

void write_f32_file(const fs::path& path, std::span<const float> values) {
  const auto bytes = floats_to_le_bytes(values);
  write_text(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace pathgraph::graphio
