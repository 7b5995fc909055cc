#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pathgraph/error.hpp"
#include "pathgraph/explain/gradcam.hpp"
#include "pathgraph/explain/heatmap.hpp"
#include "pathgraph/graphio/graph_io.hpp"
#include "pathgraph/graphio/knn.hpp"
#include "pathgraph/graphio/synth.hpp"
#include "pathgraph/train/checkpoint.hpp"
#include "pathgraph/train/evaluate.hpp"
#include "pathgraph/train/trainer.hpp"

namespace pathgraph::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "dataset.pgxset.json";

std::size_t default_threads() {
  if (const char* env = std::getenv("PATHGRAPH_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1;
}

// Creates the directory an output file goes into, so failures surface
// before any long-running work.
void make_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) fail(ErrorKind::io, "cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// Parses "WxH" into two positive integers.
std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  std::size_t w = 0, h = 0;
  if (x != std::string::npos) {
    try {
      std::size_t used_w = 0, used_h = 0;
      w = std::stoul(text.substr(0, x), &used_w);
      h = std::stoul(text.substr(x + 1), &used_h);
      if (used_w != x || used_h != text.size() - x - 1) w = h = 0;
    } catch (const std::exception&) {
      w = h = 0;
    }
  }
  if (w == 0 || h == 0) fail(ErrorKind::invalid_argument, "--grid: expected WxH with positive integers, got '" + text + "'");
  return {w, h};
}

std::vector<graphio::Point> read_coords_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::invalid_input, path.string() + ": empty coordinates file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") fail(ErrorKind::invalid_input, path.string() + ": expected header 'x,y', got '" + line + "'");
  std::vector<graphio::Point> coords;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t ux = 0, uy = 0;
      const std::string xs = line.substr(0, comma), ys = line.substr(comma + 1);
      graphio::Point p{std::stod(xs, &ux), std::stod(ys, &uy)};
      if (ux != xs.size() || uy != ys.size()) throw std::invalid_argument("trailing characters");
      coords.push_back(p);
    } catch (const std::exception&) {
      fail(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": cannot parse '" + line + "' as x,y");
    }
  }
  if (coords.empty()) fail(ErrorKind::invalid_input, path.string() + ": no coordinate rows");
  return coords;
}

/// Flags of the active subcommand after CLI > file > default resolution.
void print_resolved(std::ostream& out, const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands()) {
    out << "# resolved config: " << sub->get_name() << "\n" << sub->config_to_str(true, false);
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::invalid_input:
    case ErrorKind::parse:
    case ErrorKind::unsupported_version:
    case ErrorKind::config:
    case ErrorKind::io:
      return 2;
    default:
      return 1;
  }
}

bool truthy(const std::string& v) { return v == "true" || v == "1" || v == "yes" || v == "on"; }

// CLI11 only reads config files at the top level, so subcommand files are
// expanded here into `--flag value` arguments placed ahead of the real ones.
// Flags already on the command line are skipped, which gives the
// command line > file > default precedence.
std::vector<std::string> with_config_file(CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;

  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (!a.starts_with("--")) continue;
    const std::string flag = a.substr(0, a.find('='));
    given.insert(flag);
    if (flag == "--config") path = a.size() > flag.size() ? a.substr(flag.size() + 1) : (i + 1 < args.size() ? args[i + 1] : "");
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);

  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string flag = "--" + item.name;
    const bool section_ok = item.parents.empty() || (item.parents.size() == 1 && item.parents[0] == sub->get_name());
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!section_ok || opt == nullptr || flag == "--config") {
      throw CLI::ConfigError(path + ": unknown key '" + item.fullname() + "' for " + sub->get_name());
    }
    if (given.count(flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (!item.inputs.empty() && truthy(item.inputs.front())) injected.push_back(flag);
      continue;
    }
    injected.push_back(flag);
    injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
  }
  std::vector<std::string> merged{args[0]};
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Position-aware patch-graph classification and Grad-CAM explanation", "pathgraph"};
  app.require_subcommand(1);

  // synth
  graphio::SynthConfig synth;
  std::string synth_out, grid = "12x12";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic planted-region dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--graphs", synth.num_graphs, "Number of graphs")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--classes", synth.num_classes, "Number of classes")->capture_default_str()->check(CLI::Range(2, 1000));
  synth_cmd->add_option("--dim", synth.feature_dim, "Feature dimension")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--grid", grid, "Patch grid as WxH")->capture_default_str();
  synth_cmd->add_option("--region-frac", synth.region_frac, "Planted region fraction in (0, 1]")
      ->capture_default_str()
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            double v = 0.0;
            if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v <= 1.0)) return "value " + s + " not in (0, 1]";
            return {};
          },
          "(0,1]"));
  synth_cmd->add_option("--noise", synth.noise_sigma, "Feature noise sigma")->capture_default_str()->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--k", synth.k, "Neighbors per node")->capture_default_str()->check(CLI::PositiveNumber);

  // build-graph
  std::string bg_coords, bg_features, bg_out;
  std::size_t bg_dim = 0, bg_k = graphio::kDefaultNeighbors, bg_label = 0;
  int bg_patch = 0;
  auto* build_cmd = app.add_subcommand("build-graph", "Build a kNN patch graph from coordinates and features");
  build_cmd->add_option("--coords", bg_coords, "CSV with header x,y")->required();
  build_cmd->add_option("--features", bg_features, "Raw little-endian float32 blob, rows x dim")->required();
  build_cmd->add_option("--dim", bg_dim, "Feature dimension")->required()->check(CLI::PositiveNumber);
  build_cmd->add_option("--k", bg_k, "Neighbors per node")->capture_default_str()->check(CLI::PositiveNumber);
  build_cmd->add_option("--label", bg_label, "Graph label")->capture_default_str();
  build_cmd->add_option("--patch-size", bg_patch, "Patch size in coordinate units (0: unset)")->capture_default_str();
  build_cmd->add_option("--out", bg_out, "Output .pgx.json")->required();

  // train
  std::string tr_data, tr_variant = "spline-gat", tr_out;
  train::TrainConfig tcfg;
  std::size_t tr_heads = 4, tr_threads = default_threads();
  bool tr_concat = false, tr_no_root = false, tr_cosine = false;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset manifest");
  train_cmd->add_option("--data", tr_data, "Dataset manifest (.pgxset.json)")->required();
  train_cmd->add_option("--variant", tr_variant, "Model variant")
      ->capture_default_str()
      ->check(CLI::IsMember({"spline-gat", "gcn"}));
  train_cmd->add_option("--epochs", tcfg.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tcfg.lr, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--wd", tcfg.weight_decay, "Weight decay")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", tcfg.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--heads", tr_heads, "Heads in the first attention layer")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_flag("--concat-heads", tr_concat, "Concatenate first-layer heads instead of averaging");
  train_cmd->add_flag("--no-root-weight", tr_no_root, "Drop the spline root (self) weight");
  train_cmd->add_flag("--cosine", tr_cosine, "Cosine learning-rate decay");
  train_cmd->add_option("--seed", tcfg.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", tr_out, "Checkpoint prefix")->required();
  train_cmd->add_option("--threads", tr_threads, "Worker threads (default: PATHGRAPH_THREADS or 1)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  // eval
  std::string ev_ckpt, ev_data, ev_split = "test", ev_report;
  std::size_t ev_threads = default_threads();
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  eval_cmd->add_option("--ckpt", ev_ckpt, "Checkpoint prefix")->required();
  eval_cmd->add_option("--data", ev_data, "Dataset manifest")->required();
  eval_cmd->add_option("--split", ev_split, "Split")->capture_default_str()->check(CLI::IsMember({"train", "val", "test"}));
  eval_cmd->add_option("--report", ev_report, "Report JSON path");
  eval_cmd->add_option("--threads", ev_threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // explain
  std::string ex_ckpt, ex_graph, ex_layer = explain::kDefaultLayer, ex_prefix;
  std::size_t ex_cell = explain::kDefaultCellPixels;
  std::optional<std::size_t> ex_class;
  auto* explain_cmd = app.add_subcommand("explain", "Grad-CAM node heatmap for one graph");
  explain_cmd->add_option("--ckpt", ex_ckpt, "Checkpoint prefix")->required();
  explain_cmd->add_option("--graph", ex_graph, "Graph .pgx.json")->required();
  explain_cmd->add_option("--class", ex_class, "Class to explain (default: predicted)");
  explain_cmd->add_option("--layer", ex_layer, "Retained layer")->capture_default_str();
  explain_cmd->add_option("--out-prefix", ex_prefix, "Writes PREFIX.csv and PREFIX.ppm")->required();
  explain_cmd->add_option("--cell", ex_cell, "Pixels per grid cell")->capture_default_str()->check(CLI::PositiveNumber);

  std::string config_file;
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_file,
                    "TOML file of `flag = value` lines (optionally under [" + sub->get_name() +
                        "]); command-line flags take precedence")
        ->check(CLI::ExistingFile);
  }

  try {
    const std::vector<std::string> merged = with_config_file(app, args);
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    print_resolved(out, app);

    if (synth_cmd->parsed()) {
      std::tie(synth.grid_w, synth.grid_h) = parse_grid(grid);
      const graphio::Dataset ds = graphio::synth_dataset(synth);
      std::error_code ec;
      fs::create_directories(synth_out, ec);
      if (ec) fail(ErrorKind::io, "cannot create directory '" + synth_out + "': " + ec.message());
      const fs::path manifest = fs::path(synth_out) / kManifestName;
      graphio::save_dataset(ds, manifest);
      out << "wrote " << ds.graphs.size() << " graphs to " << manifest.string() << "\n";
    } else if (build_cmd->parsed()) {
      graphio::PatchGraph g;
      g.coords = read_coords_csv(bg_coords);
      g.features = graphio::read_f32_file(bg_features);
      const std::size_t expected = g.coords.size() * bg_dim;
      if (g.features.size() != expected) {
        fail(ErrorKind::invalid_input, bg_features + ": expected " + std::to_string(expected * 4) + " bytes (" +
                                           std::to_string(g.coords.size()) + " rows x " + std::to_string(bg_dim) +
                                           " x 4), got " + std::to_string(g.features.size() * 4));
      }
      g.feature_dim = bg_dim;
      g.label = bg_label;
      if (bg_patch > 0) g.patch_size = bg_patch;
      g.id = fs::path(bg_out).filename().string();
      if (const auto pos = g.id.find('.'); pos != std::string::npos) g.id.resize(pos);
      g.edges = graphio::knn_build_edges(g.coords, bg_k);
      graphio::validate(g);
      make_parent(bg_out);
      graphio::save_graph(g, bg_out);
      out << "wrote " << bg_out << " (" << g.num_nodes() << " nodes, " << g.edges.size() << " edges)\n";
    } else if (train_cmd->parsed()) {
      const graphio::Dataset ds = graphio::load_dataset(tr_data);
      train::ModelConfig mcfg;
      mcfg.d_in = ds.feature_dim;
      mcfg.num_classes = ds.num_classes;
      mcfg.variant = train::parse_variant(tr_variant);
      mcfg.gat_heads[0] = tr_heads;
      mcfg.first_combine = tr_concat ? layers::HeadCombine::concat : layers::HeadCombine::average;
      mcfg.root_weight = !tr_no_root;
      mcfg.seed = tcfg.seed;
      tcfg.schedule = tr_cosine ? train::LrSchedule::cosine : train::LrSchedule::constant;
      tcfg.threads = tr_threads;
      train::validate(mcfg);

      make_parent(train::checkpoint_manifest_path(tr_out));
      const train::TrainResult result = train::train_loop(ds, mcfg, tcfg, [&](const train::EpochMetrics& m) {
        out << "epoch " << m.epoch << " loss " << fmt(m.train_loss) << " val_kappa " << fmt(m.val_kappa) << "\n";
      });
      train::save_checkpoint(result.best, tr_out);
      fs::path csv = train::checkpoint_manifest_path(tr_out);
      csv.replace_extension().replace_extension(".metrics.csv");  // m.ckpt.json -> m.metrics.csv
      write_text(csv, train::metrics_csv(result.history));
      out << "best epoch " << result.best.epoch << " val_kappa " << fmt(result.history[result.best.epoch - 1].val_kappa)
          << "\nfinal val_kappa " << fmt(result.history.back().val_kappa) << "\n";
      out << "wrote " << train::checkpoint_manifest_path(tr_out).string() << " and " << csv.string() << "\n";
    } else if (eval_cmd->parsed()) {
      const train::Checkpoint ckpt = train::load_checkpoint(ev_ckpt);
      const graphio::Dataset ds = graphio::load_dataset(ev_data);
      const train::EvalReport report =
          train::evaluate(ckpt.to_model(), ds, graphio::parse_split(ev_split), ev_threads);
      const std::string text = train::to_json(report).dump(2) + "\n";
      if (!ev_report.empty()) {
        make_parent(ev_report);
        write_text(ev_report, text);
      }
      out << text;
    } else if (explain_cmd->parsed()) {
      const train::Checkpoint ckpt = train::load_checkpoint(ex_ckpt);
      const train::Model model = ckpt.to_model();
      const graphio::PatchGraph g = graphio::load_graph(ex_graph);
      const train::GraphInputs inputs = train::prepare_graph(g, model.config);
      const std::size_t cls = ex_class ? *ex_class : train::argmax(train::predict_logits(model, inputs));
      explain::NodeSaliency sal = explain::gradcam(model, inputs, cls, ex_layer);
      sal.graph_id = g.id;
      make_parent(fs::path(ex_prefix));
      const explain::HeatmapPaths paths = explain::render_heatmap(sal, g, ex_prefix, ex_cell);
      out << "class " << cls << " layer " << ex_layer << " max_raw " << sal.max_raw << "\nwrote "
          << paths.csv.string() << " and " << paths.ppm.string() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pathgraph::cli
