#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathgraph/train/model.hpp"

namespace pathgraph::train {

enum class LrSchedule { constant, cosine };

std::string to_string(LrSchedule schedule);

/// Optimisation recipe; defaults follow the published graph training
/// settings (20 epochs, AdamW, lr 1e-3, weight decay 5e-4, batch 2).
struct TrainConfig {
  std::size_t epochs = 20;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  std::size_t batch_size = 2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  LrSchedule schedule = LrSchedule::constant;
  std::uint64_t seed = 0;
  /// Worker threads for per-graph passes; never changes results.
  std::size_t threads = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_kappa = 0.0;
  double lr = 0.0;
  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  std::size_t epoch = 0;
  std::vector<EpochMetrics> history;
  ParamStore params;

  Model to_model() const { return Model{model, params}; }
};

/// Snapshot of a model; parameters are rounded to float32, the on-disk
/// precision, so saving and reloading is lossless.
Checkpoint make_checkpoint(const Model& model, const TrainConfig& train, std::size_t epoch,
                           std::vector<EpochMetrics> history);

/// `<prefix>.ckpt.json` (manifest) + `<prefix>.ckpt.bin` (little-endian float32).
/// `prefix` may also be given as the manifest path itself.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& prefix);
Checkpoint load_checkpoint(const std::filesystem::path& prefix);

/// Throws Error(config) when the checkpoint was trained with another
/// variant or different dimensions than `expected`.
void check_compatible(const Checkpoint& ckpt, const ModelConfig& expected);

std::filesystem::path checkpoint_manifest_path(const std::filesystem::path& prefix);
std::filesystem::path checkpoint_blob_path(const std::filesystem::path& prefix);

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);

/// CSV `epoch,train_loss,val_kappa,lr` with a header row.
std::string metrics_csv(const std::vector<EpochMetrics>& history);

}  // namespace pathgraph::train
