#include <cmath>
#include <queue>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "pathgraph/error.hpp"
#include "pathgraph/graphio/base64.hpp"
#include "pathgraph/graphio/graph_io.hpp"
#include "pathgraph/graphio/knn.hpp"
#include "pathgraph/graphio/synth.hpp"
#include "support.hpp"

using namespace pathgraph;
using namespace pathgraph::graphio;

namespace {

std::set<std::pair<std::size_t, std::size_t>> as_set(const EdgeList& edges) {
  std::set<std::pair<std::size_t, std::size_t>> s;
  for (const Edge& e : edges) s.insert({e.src, e.dst});
  return s;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected pathgraph::Error");
  return ErrorKind::numeric;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

PatchGraph small_graph() {
  PatchGraph g;
  g.id = "g";
  g.label = 1;
  g.coords = {{0, 0}, {3, 4}, {1, 1}};
  g.feature_dim = 2;
  g.features = {0.5f, -1.25f, 3.0f, 1e-7f, -0.0f, 42.0f};
  g.edges = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  return g;
}

}  // namespace

TEST_CASE("knn: collinear points with tie-break toward lower index") {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {2, 0}};
  CHECK(as_set(knn_build_edges(pts, 1)) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
}

TEST_CASE("knn: single node and 3x3 grid") {
  CHECK(knn_build_edges(std::vector<Point>{{5, 5}}, 3).empty());
  std::vector<Point> grid;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) grid.push_back({double(x), double(y)});
  std::set<std::size_t> from_center;
  for (const Edge& e : knn_build_edges(grid, 4))
    if (e.src == 4) from_center.insert(e.dst);
  // Its own four nearest are the edge-adjacent cells; corners pick the centre
  // as well (distance sqrt 2), so symmetrization links it to all eight.
  for (std::size_t v : {1, 3, 5, 7}) CHECK(from_center.count(v) == 1);
  CHECK(from_center == std::set<std::size_t>{0, 1, 2, 3, 5, 6, 7, 8});
}

TEST_CASE("knn matches brute force and is symmetric") {
  std::mt19937_64 rng(11);
  for (int c = 0; c < 40; ++c) {
    const std::size_t n = 1 + rng() % (c < 5 ? 500 : 60);
    const std::size_t k = 1 + rng() % 10;
    std::vector<Point> pts;
    // Integer lattice points create many exact distance ties.
    std::uniform_int_distribution<int> pos(0, 12);
    for (std::size_t i = 0; i < n; ++i) pts.push_back({double(pos(rng)), double(pos(rng))});
    const EdgeList edges = knn_build_edges(pts, k);
    const auto set = as_set(edges);
    CHECK(set.size() == edges.size());
    CHECK(set == pgtest::brute_knn(pts, k));
    for (const auto& [s, d] : set) CHECK(set.count({d, s}) == 1);
  }
}

TEST_CASE("knn errors") {
  CHECK(kind_of([] { knn_build_edges(std::vector<Point>{{0, 0}, {1, 1}}, 0); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { knn_build_edges(std::vector<Point>{{0, 0}, {NAN, 1}}, 1); }) == ErrorKind::invalid_input);
}

TEST_CASE("pseudo coordinates: examples") {
  const std::vector<Point> pts{{0, 0}, {3, 4}};
  const PseudoCoords pc = compute_pseudo_coords(pts, {{0, 1}, {1, 0}});
  CHECK(pc.norm_const == 4.0);
  for (const auto& u : pc.u) {
    CHECK(u[0] == 0.75);
    CHECK(u[1] == 1.0);
  }
  const PseudoCoords same = compute_pseudo_coords(std::vector<Point>{{2, 2}, {2, 2}}, {{0, 1}, {1, 0}});
  CHECK(same.u[0] == std::array<double, 2>{0.0, 0.0});
  CHECK(same.norm_const == 1.0);
}

TEST_CASE("pseudo coordinates: range, max component, translation and reflection invariance") {
  std::mt19937_64 rng(12);
  for (int c = 0; c < 100; ++c) {
    PatchGraph g = pgtest::random_graph(rng, 2 + rng() % 12, 1, 0.5);
    if (g.edges.empty()) continue;
    const PseudoCoords pc = compute_pseudo_coords(g);
    double top = 0.0;
    for (const auto& u : pc.u) {
      CHECK(u[0] >= 0.0);
      CHECK(u[0] <= 1.0);
      CHECK(u[1] >= 0.0);
      CHECK(u[1] <= 1.0);
      top = std::max({top, u[0], u[1]});
    }
    if (pc.norm_const != 1.0 || top > 0.0) CHECK(top == 1.0);
    CHECK(compute_pseudo_coords(g) == pc);

    // Shifts that keep coordinates exactly representable.
    PatchGraph moved = g;
    const double sx = double(int(rng() % 2001) - 1000) / 64.0, sy = double(int(rng() % 2001) - 1000);
    for (auto& p : moved.coords) p = {p.x + sx, p.y + sy};
    CHECK(compute_pseudo_coords(moved) == pc);

    PatchGraph mirrored = g;
    for (auto& p : mirrored.coords) p.x = -p.x;
    CHECK(compute_pseudo_coords(mirrored) == pc);
  }
}

TEST_CASE("graph validation") {
  PatchGraph g = small_graph();
  validate(g);
  PatchGraph bad = g;
  bad.edges.push_back({2, 2});
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::invalid_input);
  bad = g;
  bad.edges.pop_back();
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::invalid_input);
  bad = g;
  bad.features[3] = INFINITY;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::invalid_input);
  bad = g;
  bad.edges.push_back({0, 1});
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::invalid_input);
}

TEST_CASE("base64 round trip and malformed input") {
  std::mt19937_64 rng(13);
  for (std::size_t len = 0; len < 40; ++len) {
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) b = std::uint8_t(rng());
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
  CHECK(base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}) == "Zm9vYg==");
  CHECK(kind_of([] { base64_decode("Zm9v!g=="); }) == ErrorKind::parse);
  CHECK(kind_of([] { base64_decode("Zm9"); }) == ErrorKind::parse);
}

TEST_CASE("graph save/load is bit exact, embedded and external") {
  pgtest::TempDir dir("graphio");
  PatchGraph g = small_graph();
  g.region_mask = std::vector<bool>{true, false, true};
  g.patch_size = 256;
  save_graph(g, dir / "a.pgx.json");
  CHECK(load_graph(dir / "a.pgx.json") == g);
  save_graph(g, dir / "b.pgx.json", {.external_features = true});
  CHECK(std::filesystem::exists(dir / "b.f32"));
  CHECK(load_graph(dir / "b.pgx.json") == g);

  std::mt19937_64 rng(14);
  for (int c = 0; c < 20; ++c) {
    const PatchGraph r = pgtest::random_graph(rng, 1 + rng() % 30, 1 + rng() % 5);
    CHECK(graph_from_json(graph_to_json(r)) == r);
  }
}

TEST_CASE("graph load errors") {
  pgtest::TempDir dir("graphio-err");
  const PatchGraph g = small_graph();
  nlohmann::json doc = nlohmann::json::parse(graph_to_json(g));

  nlohmann::json bad_edge = doc;
  bad_edge["edges"].push_back({0, 7});
  const std::string msg = message_of([&] { graph_from_json(bad_edge.dump()); });
  CHECK(msg.find("edge 4 (0, 7)") != std::string::npos);
  CHECK(kind_of([&] { graph_from_json(bad_edge.dump()); }) == ErrorKind::parse);

  nlohmann::json version = doc;
  version["version"] = 2;
  CHECK(kind_of([&] { graph_from_json(version.dump()); }) == ErrorKind::unsupported_version);

  const std::string broken = doc.dump().substr(0, 40);
  CHECK(message_of([&] { graph_from_json(broken); }).find("byte offset") != std::string::npos);

  save_graph(g, dir / "t.pgx.json", {.external_features = true});
  const std::string blob = pgtest::read_file(dir / "t.f32");
  pgtest::write_file(dir / "t.f32", blob.substr(0, blob.size() - 4));
  const std::string trunc = message_of([&] { load_graph(dir / "t.pgx.json"); });
  CHECK(trunc.find("holds 20 bytes, expected 24") != std::string::npos);
}

TEST_CASE("synth: canonical configuration counts") {
  const SynthConfig cfg{};
  CHECK(planted_region_size(cfg) == 36);
  const Dataset ds = synth_dataset(cfg);
  CHECK(ds.graphs.size() == 200);
  CHECK(ds.indices(Split::train).size() == 140);
  CHECK(ds.indices(Split::val).size() == 30);
  CHECK(ds.indices(Split::test).size() == 30);
  for (const PatchGraph& g : ds.graphs) {
    CHECK(g.num_nodes() == 144);
    REQUIRE(g.region_mask);
    CHECK(std::count(g.region_mask->begin(), g.region_mask->end(), true) == 36);
  }
  validate(ds);
}

TEST_CASE("synth: noiseless signature, contiguity, determinism") {
  SynthConfig cfg;
  cfg.num_graphs = 15;
  cfg.noise_sigma = 0.0;
  cfg.feature_dim = 6;
  cfg.grid_w = 7;
  cfg.grid_h = 5;
  const Dataset ds = synth_dataset(cfg);
  for (const PatchGraph& g : ds.graphs) {
    const auto& mask = *g.region_mask;
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
      for (std::size_t c = 0; c < cfg.feature_dim; ++c) {
        const float expected = (mask[v] && c == g.label) ? float(kClassSignal) : 0.0f;
        CHECK(g.feature_row(v)[c] == expected);
      }
    // Region is 4-connected on the grid.
    std::size_t start = 0;
    while (!mask[start]) ++start;
    std::vector<bool> seen(g.num_nodes(), false);
    std::queue<std::size_t> todo;
    todo.push(start);
    seen[start] = true;
    std::size_t reached = 0;
    while (!todo.empty()) {
      const std::size_t v = todo.front();
      todo.pop();
      ++reached;
      const std::size_t x = v % cfg.grid_w, y = v / cfg.grid_w;
      const std::size_t nb[4] = {x > 0 ? v - 1 : v, x + 1 < cfg.grid_w ? v + 1 : v, y > 0 ? v - cfg.grid_w : v,
                                 y + 1 < cfg.grid_h ? v + cfg.grid_w : v};
      for (std::size_t u : nb)
        if (mask[u] && !seen[u]) {
          seen[u] = true;
          todo.push(u);
        }
    }
    CHECK(reached == std::size_t(std::count(mask.begin(), mask.end(), true)));
  }
  CHECK(synth_dataset(cfg) == ds);
  cfg.seed += 1;
  CHECK_FALSE(synth_dataset(cfg) == ds);
}

TEST_CASE("synth: invalid configurations") {
  SynthConfig cfg;
  cfg.region_frac = 1.5;
  CHECK(message_of([&] { validate(cfg); }).find("region_frac") != std::string::npos);
  cfg = {};
  cfg.num_classes = 1;
  CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::invalid_argument);
  cfg = {};
  cfg.grid_w = 3;
  CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::invalid_argument);
}

TEST_CASE("dataset save/load round trip") {
  pgtest::TempDir dir("dataset");
  SynthConfig cfg;
  cfg.num_graphs = 10;
  cfg.feature_dim = 5;
  const Dataset ds = synth_dataset(cfg);
  save_dataset(ds, dir / "set.pgxset.json");
  CHECK(load_dataset(dir / "set.pgxset.json") == ds);
  const auto manifest = nlohmann::json::parse(pgtest::read_file(dir / "set.pgxset.json"));
  CHECK(manifest["graphs"].size() == 10);
  CHECK(manifest["version"] == 1);
}
