#pragma once

#include <array>
#include <string>
#include <vector>

#include "afnet/nn/layers.hpp"

namespace afnet::arch {

enum class BackboneKind { kTiny, kResNet18, kResNet34, kResNet50 };

std::string to_string(BackboneKind kind);
BackboneKind parse_backbone_kind(const std::string& text);

/// Residual encoder description. Stage i emits features at stride 4 * 2^i.
struct BackboneConfig {
  BackboneKind kind = BackboneKind::kTiny;
  int in_channels = 3;
  int stem_width = 16;
  int stem_kernel = 3;
  std::array<int, 4> blocks{1, 1, 1, 1};
  std::array<int, 4> widths{16, 32, 64, 128};
  bool bottleneck = false;

  static BackboneConfig preset(BackboneKind kind, int in_channels);
  /// Human-readable list of violated invariants; empty when valid.
  std::vector<std::string> violations(const std::string& label) const;
};

enum class VariantTag { kDFN, kMDFN, kMPVN, kMPVN_M, kMPVN_R, kMPVN_RM };

std::string to_string(VariantTag tag);
VariantTag parse_variant_tag(const std::string& text);
const std::array<VariantTag, 6>& all_variant_tags();

enum class EncoderFusion { kNone, kSum, kMafb };
enum class DecoderFusion { kCab, kRafb };

struct ModelVariant {
  VariantTag tag = VariantTag::kMPVN_RM;
  BackboneConfig main;
  BackboneConfig aux;  // ignored unless `multipath`
  bool multipath = true;
  EncoderFusion encoder_fusion = EncoderFusion::kMafb;
  DecoderFusion decoder_fusion = DecoderFusion::kRafb;
  int decoder_width = 512;
  int num_classes = 6;
  int optical_channels = 3;
  int aux_channels = 2;
  int attention_reduction = 16;
  /// Weights low-level features with spatial attention and high-level ones
  /// with channel attention in RAFB (the figure-caption reading).
  bool rafb_caption_order = false;
  nn::UpsampleMapping upsample = nn::UpsampleMapping::kHalfPixel;

  /// Tag-consistent variant: wiring flags and input channels follow the tag.
  static ModelVariant from_tag(VariantTag tag, BackboneKind main_kind = BackboneKind::kTiny,
                               BackboneKind aux_kind = BackboneKind::kTiny, int decoder_width = 512,
                               int num_classes = 6);

  bool stacks_aux() const { return tag == VariantTag::kMDFN; }
  std::vector<std::string> violations() const;
  /// Throws ValidationError listing every violation.
  void validate() const;
};

}  // namespace afnet::arch
