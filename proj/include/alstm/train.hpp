#pragma once

#include "alstm/dataset.hpp"
#include "alstm/model.hpp"
#include "alstm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace alstm {

struct TrainingConfig {
  Scalar learning_rate = 6e-4;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 42;
  int checkpoint_every = 1;  // epochs between checkpoints
  int threads = 1;           // per-sample batch workers
  Scalar adam_beta1 = 0.9;
  Scalar adam_beta2 = 0.999;
  Scalar adam_epsilon = 1e-8;
  ArchitectureConfig arch;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;          // 1-based
  Scalar train_mse = 0;   // mean train-mode loss over the epoch's samples
  Scalar val_mse = 0;     // inference-mode loss on the validation partition
  double seconds = 0;     // wall clock, reported separately from history.csv
};

struct TrainingHistory {
  std::vector<EpochStats> epochs;
};

/// Self-describing training snapshot: parameters, optimizer moments, config
/// and normalization params. Serialized as a JSON manifest line plus
/// little-endian float64 tensor payloads; identical state produces
/// identical bytes.
struct Checkpoint {
  int epoch = 0;
  Scalar val_mse = 0;
  TrainingConfig config;
  AssociatedNetwork network;
  AdamState adam;
  std::map<std::string, NormalizationParams> normalization;
  std::vector<std::string> tickers;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Runs exactly config.epochs epochs of shuffled mini-batch ADAM over the
/// train partition; no early stopping. Writes checkpoint-NNNN.ckpt per
/// cadence (plus the final epoch), history.csv (epoch,train_mse,val_mse)
/// and timing.csv into out_dir. Batch gradients reduce per-sample in
/// sample-index order, so results are bitwise identical for any worker
/// count. Throws DivergenceError on a non-finite loss or gradient; earlier
/// checkpoints survive the abort.
TrainingHistory train(const SplitDataset& dataset, const TrainingConfig& config,
                      const std::filesystem::path& out_dir);

/// Checkpoint with minimal recorded validation MSE; ties break toward the
/// earliest epoch. Throws NoDataError when the directory has none.
std::filesystem::path select_best_path(const std::filesystem::path& checkpoint_dir);
Checkpoint select_best(const std::filesystem::path& checkpoint_dir);

}  // namespace alstm
