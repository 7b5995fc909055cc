#include "pathgraph/train/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pathgraph/error.hpp"

namespace pathgraph::train {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kCheckpointVersion = 1;

std::string strip_suffix(std::string s, const std::string& suffix) {
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    s.resize(s.size() - suffix.size());
  }
  return s;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T>
T read_field(const json& doc, const char* name, const std::string& source) {
  auto it = doc.find(name);
  if (it == doc.end()) fail(ErrorKind::parse, source + ": missing field \"" + std::string(name) + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, source + ": field \"" + std::string(name) + "\": " + e.what());
  }
}

}  // namespace

std::string to_string(LrSchedule schedule) { return schedule == LrSchedule::cosine ? "cosine" : "constant"; }

void validate(const TrainConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorKind::config, "train config: " + what); };
  if (cfg.epochs < 1) bad("epochs must be >= 1");
  if (!(cfg.lr >= 0.0)) bad("lr must be >= 0");
  if (!(cfg.weight_decay >= 0.0)) bad("weight decay must be >= 0");
  if (cfg.batch_size < 1) bad("batch size must be >= 1");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) bad("betas must lie in [0, 1)");
  if (!(cfg.eps > 0.0)) bad("eps must be positive");
  if (cfg.threads < 1) bad("threads must be >= 1");
}

json to_json(const ModelConfig& cfg) {
  return json{{"variant", to_string(cfg.variant)},
              {"d_in", cfg.d_in},
              {"num_classes", cfg.num_classes},
              {"spline_dims", cfg.spline_dims},
              {"spline_degree", cfg.kernel.degree},
              {"kernel_size", {cfg.kernel.size_x, cfg.kernel.size_y}},
              {"root_weight", cfg.root_weight},
              {"gat_dims", cfg.gat_dims},
              {"gat_heads", cfg.gat_heads},
              {"first_combine", layers::to_string(cfg.first_combine)},
              {"self_loops", cfg.self_loops},
              {"leaky_slope", cfg.leaky_slope},
              {"gcn_dims", cfg.gcn_dims},
              {"mlp_hidden", cfg.mlp_hidden},
              {"seed", cfg.seed}};
}

ModelConfig model_config_from_json(const json& doc) {
  const std::string src = "model config";
  ModelConfig cfg;
  cfg.variant = parse_variant(read_field<std::string>(doc, "variant", src));
  cfg.d_in = read_field<std::size_t>(doc, "d_in", src);
  cfg.num_classes = read_field<std::size_t>(doc, "num_classes", src);
  cfg.spline_dims = read_field<std::array<std::size_t, 2>>(doc, "spline_dims", src);
  cfg.kernel.degree = read_field<int>(doc, "spline_degree", src);
  const auto ks = read_field<std::array<std::size_t, 2>>(doc, "kernel_size", src);
  cfg.kernel.size_x = ks[0];
  cfg.kernel.size_y = ks[1];
  cfg.root_weight = read_field<bool>(doc, "root_weight", src);
  cfg.gat_dims = read_field<std::array<std::size_t, 2>>(doc, "gat_dims", src);
  cfg.gat_heads = read_field<std::array<std::size_t, 2>>(doc, "gat_heads", src);
  cfg.first_combine = layers::parse_head_combine(read_field<std::string>(doc, "first_combine", src));
  cfg.self_loops = read_field<bool>(doc, "self_loops", src);
  cfg.leaky_slope = read_field<double>(doc, "leaky_slope", src);
  cfg.gcn_dims = read_field<std::array<std::size_t, 2>>(doc, "gcn_dims", src);
  cfg.mlp_hidden = read_field<std::size_t>(doc, "mlp_hidden", src);
  cfg.seed = read_field<std::uint64_t>(doc, "seed", src);
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  return json{{"epochs", cfg.epochs},       {"lr", cfg.lr},       {"weight_decay", cfg.weight_decay},
              {"batch_size", cfg.batch_size}, {"beta1", cfg.beta1}, {"beta2", cfg.beta2},
              {"eps", cfg.eps},             {"schedule", to_string(cfg.schedule)}, {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const json& doc) {
  const std::string src = "train config";
  TrainConfig cfg;
  cfg.epochs = read_field<std::size_t>(doc, "epochs", src);
  cfg.lr = read_field<double>(doc, "lr", src);
  cfg.weight_decay = read_field<double>(doc, "weight_decay", src);
  cfg.batch_size = read_field<std::size_t>(doc, "batch_size", src);
  cfg.beta1 = read_field<double>(doc, "beta1", src);
  cfg.beta2 = read_field<double>(doc, "beta2", src);
  cfg.eps = read_field<double>(doc, "eps", src);
  const auto schedule = read_field<std::string>(doc, "schedule", src);
  if (schedule != "constant" && schedule != "cosine") fail(ErrorKind::parse, src + ": unknown schedule " + schedule);
  cfg.schedule = schedule == "cosine" ? LrSchedule::cosine : LrSchedule::constant;
  cfg.seed = read_field<std::uint64_t>(doc, "seed", src);
  return cfg;
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_kappa,lr\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << format_double(m.train_loss) << ',' << format_double(m.val_kappa) << ','
        << format_double(m.lr) << '\n';
  }
  return out.str();
}

Checkpoint make_checkpoint(const Model& model, const TrainConfig& train, std::size_t epoch,
                           std::vector<EpochMetrics> history) {
  Checkpoint ckpt{model.config, train, epoch, std::move(history), model.params};
  for (std::size_t i = 0; i < ckpt.params.size(); ++i)
    for (double& v : ckpt.params.tensor(i).data()) v = static_cast<double>(static_cast<float>(v));
  return ckpt;
}

fs::path checkpoint_manifest_path(const fs::path& prefix) {
  return fs::path(strip_suffix(strip_suffix(prefix.string(), ".ckpt.json"), ".ckpt.bin") + ".ckpt.json");
}

fs::path checkpoint_blob_path(const fs::path& prefix) {
  return fs::path(strip_suffix(strip_suffix(prefix.string(), ".ckpt.json"), ".ckpt.bin") + ".ckpt.bin");
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& prefix) {
  const fs::path manifest_path = checkpoint_manifest_path(prefix);
  const fs::path blob_path = checkpoint_blob_path(prefix);

  std::string blob;
  json tensors = json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const ag::Tensor& t = ckpt.params.tensor(i);
    tensors.push_back({{"name", ckpt.params.name(i)}, {"offset", offset}, {"length", t.size()}, {"shape", t.shape()}});
    for (double v : t.data()) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
    offset += t.size();
  }

  json history = json::array();
  for (const auto& m : ckpt.history) {
    history.push_back({{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"val_kappa", m.val_kappa}, {"lr", m.lr}});
  }

  json doc{{"version", kCheckpointVersion},
           {"model", to_json(ckpt.model)},
           {"train", to_json(ckpt.train)},
           {"epoch", ckpt.epoch},
           {"history", std::move(history)},
           {"blob", blob_path.filename().string()},
           {"blob_bytes", blob.size()},
           {"tensors", std::move(tensors)}};

  std::ofstream bin(blob_path, std::ios::binary | std::ios::trunc);
  if (!bin) fail(ErrorKind::io, "cannot open '" + blob_path.string() + "' for writing");
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!bin) fail(ErrorKind::io, "failed writing '" + blob_path.string() + "'");

  std::ofstream man(manifest_path, std::ios::binary | std::ios::trunc);
  if (!man) fail(ErrorKind::io, "cannot open '" + manifest_path.string() + "' for writing");
  man << doc.dump(2) << '\n';
  if (!man) fail(ErrorKind::io, "failed writing '" + manifest_path.string() + "'");
}

Checkpoint load_checkpoint(const fs::path& prefix) {
  const fs::path manifest_path = checkpoint_manifest_path(prefix);
  const std::string source = manifest_path.string();
  std::ifstream man(manifest_path, std::ios::binary);
  if (!man) fail(ErrorKind::io, "cannot open checkpoint manifest '" + source + "'");
  json doc;
  try {
    doc = json::parse(man);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, source + ": " + e.what());
  }
  const int version = read_field<int>(doc, "version", source);
  if (version != kCheckpointVersion) {
    fail(ErrorKind::unsupported_version, source + ": unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.model = model_config_from_json(read_field<json>(doc, "model", source));
  ckpt.train = train_config_from_json(read_field<json>(doc, "train", source));
  ckpt.epoch = read_field<std::size_t>(doc, "epoch", source);
  for (const json& m : read_field<json>(doc, "history", source)) {
    ckpt.history.push_back({read_field<std::size_t>(m, "epoch", source), read_field<double>(m, "train_loss", source),
                            read_field<double>(m, "val_kappa", source), read_field<double>(m, "lr", source)});
  }

  const fs::path blob_path = manifest_path.parent_path() / read_field<std::string>(doc, "blob", source);
  std::ifstream bin(blob_path, std::ios::binary);
  if (!bin) fail(ErrorKind::io, "cannot open checkpoint blob '" + blob_path.string() + "'");
  const std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  std::size_t expected_floats = 0;
  const json& tensors = read_field<json>(doc, "tensors", source);
  for (const json& t : tensors) {
    expected_floats = std::max(expected_floats, read_field<std::size_t>(t, "offset", source) +
                                                    read_field<std::size_t>(t, "length", source));
  }
  if (blob.size() != expected_floats * 4) {
    fail(ErrorKind::parse, blob_path.string() + ": tensor blob holds " + std::to_string(blob.size()) +
                               " bytes, expected " + std::to_string(expected_floats * 4));
  }

  for (const json& t : tensors) {
    const auto name = read_field<std::string>(t, "name", source);
    const auto offset = read_field<std::size_t>(t, "offset", source);
    const auto length = read_field<std::size_t>(t, "length", source);
    const auto shape = read_field<ag::Shape>(t, "shape", source);
    if (ag::shape_numel(shape) != length) {
      fail(ErrorKind::parse, source + ": tensor '" + name + "' length " + std::to_string(length) +
                                 " does not match shape " + ag::shape_string(shape));
    }
    ag::Tensor value(shape);
    for (std::size_t k = 0; k < length; ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[4 * (offset + k) + b])) << (8 * b);
      }
      value[k] = static_cast<double>(std::bit_cast<float>(bits));
    }
    ckpt.params.add(name, std::move(value));
  }

  // Parameter names and shapes must match what the stored config builds.
  const Model reference = build_model(ckpt.model);
  if (reference.params.size() != ckpt.params.size()) {
    fail(ErrorKind::config, source + ": checkpoint holds " + std::to_string(ckpt.params.size()) +
                                " tensors, its config defines " + std::to_string(reference.params.size()));
  }
  ParamStore ordered;
  for (std::size_t i = 0; i < reference.params.size(); ++i) {
    const std::string& name = reference.params.name(i);
    if (!ckpt.params.contains(name) || ckpt.params.at(name).shape() != reference.params.tensor(i).shape()) {
      fail(ErrorKind::config, source + ": tensor '" + name + "' missing or mis-shaped for the stored config");
    }
    ordered.add(name, ckpt.params.at(name));
  }
  ckpt.params = std::move(ordered);
  return ckpt;
}

void check_compatible(const Checkpoint& ckpt, const ModelConfig& expected) {
  if (ckpt.model.variant != expected.variant) {
    fail(ErrorKind::config, "variant mismatch: checkpoint is " + to_string(ckpt.model.variant) + ", expected " +
                                to_string(expected.variant));
  }
  ModelConfig a = ckpt.model;
  ModelConfig b = expected;
  a.seed = b.seed = 0;
  if (a != b) fail(ErrorKind::config, "checkpoint dimensions do not match the requested model config");
}

}  // namespace pathgraph::train
