#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "afnet/arch/variant.hpp"
#include "afnet/geo/tiling.hpp"

namespace afnet::cli {

struct ModelConfig {
  arch::VariantTag variant = arch::VariantTag::kMPVN_RM;
  arch::BackboneKind main_backbone = arch::BackboneKind::kResNet50;
  arch::BackboneKind aux_backbone = arch::BackboneKind::kResNet18;
  int decoder_width = 512;
  int classes = 6;
  int attention_reduction = 16;
  bool rafb_caption_order = false;
  nn::UpsampleMapping upsample = nn::UpsampleMapping::kHalfPixel;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct DataConfig {
  std::filesystem::path manifest;
  std::filesystem::path prepared_dir = "prepared";
  std::filesystem::path stats = "prepared/stats.csv";
  int slice = 800;
  int overlap = 400;
  int crop = 640;
  bool hflip = true;
  bool vflip = true;
  bool rotate = true;
  std::string palette;  // normalized "name:r,g,b;..." form
  int nir_channel = 0;
  int red_channel = 1;
  std::vector<std::string> val_tiles;
  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 2;
  std::uint64_t seed = 0;
  double lr0 = 1e-5;
  double lr1 = 1e-3;
  int warmup_epochs = 100;
  int step_interval = 200;
  double step_factor = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path log = "checkpoints/train_log.csv";
  std::filesystem::path resume;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct InferConfig {
  std::filesystem::path manifest;
  std::filesystem::path checkpoint = "checkpoints/last.afck";
  int tile = 1920;
  int overlap = 960;
  std::string tta = "full";
  geo::StitchMode stitch = geo::StitchMode::kCrop;
  std::filesystem::path output_dir = "predictions";
  bool probabilities = false;
  bool dump_features = false;
  friend bool operator==(const InferConfig&, const InferConfig&) = default;
};

struct EvalConfig {
  int erode = 3;
  std::vector<int> mean_classes{0, 1, 2, 3, 4};
  std::filesystem::path pred_dir = "predictions";
  std::filesystem::path gt_dir;
  std::filesystem::path report_dir = "report";
  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

enum class Command { kAny, kPrepare, kTrain, kInfer, kEval, kGradcheck };

/// Every run setting. Defaults follow the published training recipe at
/// full scale; desk-scale runs override backbones, widths and sizes.
struct RunConfig {
  ModelConfig model;
  DataConfig data;
  TrainConfig train;
  InferConfig infer;
  EvalConfig eval;

  RunConfig();

  arch::ModelVariant model_variant() const;
  /// Field-level and cross-field problems, plus those specific to `cmd`.
  std::vector<std::string> violations(Command cmd = Command::kAny) const;
  /// Throws ValidationError listing every violation.
  void validate(Command cmd = Command::kAny) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// `section.key` -> raw value, applied on top of the parsed document.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// INI text with sections [model], [data], [train], [infer], [eval].
/// Missing keys keep their defaults; unknown sections or keys and
/// malformed values are collected and thrown together as a ValidationError.
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Every field, defaults included, in a fixed order. Doubles use the
/// shortest representation that reads back to the same value.
std::string serialize_config(const RunConfig& config);
void save_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace afnet::cli
