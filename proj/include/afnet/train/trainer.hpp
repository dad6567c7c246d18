#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afnet/arch/model.hpp"
#include "afnet/train/data.hpp"
#include "afnet/train/optimizer.hpp"

namespace afnet::train {

struct TrainOptions {
  int epochs = 1;
  int batch_size = 2;
  std::uint64_t seed = 0;
  bool shuffle = true;
  AdamConfig adam;
  LrSchedule schedule;  // iters_per_epoch is derived from the dataset
  AugmentConfig augment;
  int start_epoch = 0;
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  std::filesystem::path log_path;        // empty: no log file
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_acc;
  int steps = 0;
};

/// `epoch,lr,train_loss,val_loss,val_acc` with empty fields for missing
/// validation values.
std::string format_log_line(const EpochRecord& r);

struct TrainResult {
  std::vector<EpochRecord> history;
  std::optional<int> best_epoch;
};

/// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

/// Mini-batch training with Adam, the warmup/step schedule and deep
/// supervision. Deterministic for a fixed seed: shuffling and augmentation
/// draw from a per-epoch stream, so resuming at `start_epoch` replays the
/// same batches an uninterrupted run would see.
template <typename T>
TrainResult train_loop(const arch::AfNetModel<T>& model, AdamState& state, const std::vector<Sample>& train,
                       const std::vector<Sample>* validation, const TrainOptions& options,
                       const EpochCallback& on_epoch = {});

/// Eval-mode deep-supervision loss and finest-stage pixel accuracy.
template <typename T>
std::pair<double, double> evaluate(const arch::AfNetModel<T>& model, const std::vector<Sample>& samples,
                                   int batch_size);

/// Canonical text identifying every architecture-shaping field.
std::string variant_signature(const arch::ModelVariant& v);

/// Parameters, optimizer state and metadata in one AFCK file.
template <typename T>
void save_training_checkpoint(const std::filesystem::path& path, const arch::AfNetModel<T>& model,
                              const AdamState& state, int epoch);

/// Restores parameters and optimizer state; returns the next epoch to run.
/// A checkpoint written for a different variant is a ContractError that
/// names both signatures.
template <typename T>
int load_training_checkpoint(const std::filesystem::path& path, const arch::AfNetModel<T>& model, AdamState* state);

}  // namespace afnet::train
