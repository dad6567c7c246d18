#include "afnet/arch/variant.hpp"

#include "afnet/core/errors.hpp"

namespace afnet::arch {

namespace {

struct TagName {
  VariantTag tag;
  const char* name;
};

constexpr TagName kTagNames[] = {
    {VariantTag::kDFN, "DFN"},       {VariantTag::kMDFN, "mDFN"},     {VariantTag::kMPVN, "MPVN"},
    {VariantTag::kMPVN_M, "MPVN-M"}, {VariantTag::kMPVN_R, "MPVN-R"}, {VariantTag::kMPVN_RM, "MPVN-RM"},
};

}  // namespace

std::string to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::kTiny:
      return "tiny";
    case BackboneKind::kResNet18:
      return "resnet18";
    case BackboneKind::kResNet34:
      return "resnet34";
    case BackboneKind::kResNet50:
      return "resnet50";
  }
  return "?";
}

BackboneKind parse_backbone_kind(const std::string& text) {
  for (auto k : {BackboneKind::kTiny, BackboneKind::kResNet18, BackboneKind::kResNet34, BackboneKind::kResNet50}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown backbone '" + text + "' (expected tiny, resnet18, resnet34 or resnet50)");
}

BackboneConfig BackboneConfig::preset(BackboneKind kind, int in_channels) {
  BackboneConfig c;
  c.kind = kind;
  c.in_channels = in_channels;
  switch (kind) {
    case BackboneKind::kTiny:
      break;
    case BackboneKind::kResNet18:
      c.stem_width = 64;
      c.stem_kernel = 7;
      c.blocks = {2, 2, 2, 2};
      c.widths = {64, 128, 256, 512};
      break;
    case BackboneKind::kResNet34:
      c.stem_width = 64;
      c.stem_kernel = 7;
      c.blocks = {3, 4, 6, 3};
      c.widths = {64, 128, 256, 512};
      break;
    case BackboneKind::kResNet50:
      c.stem_width = 64;
      c.stem_kernel = 7;
      c.blocks = {3, 4, 6, 3};
      c.widths = {256, 512, 1024, 2048};
      c.bottleneck = true;
      break;
  }
  return c;
}

std::vector<std::string> BackboneConfig::violations(const std::string& label) const {
  std::vector<std::string> out;
  if (in_channels < 1) out.push_back(label + ".in_channels must be >= 1");
  if (stem_width < 1) out.push_back(label + ".stem_width must be >= 1");
  if (stem_kernel < 1 || stem_kernel % 2 == 0) out.push_back(label + ".stem_kernel must be odd and >= 1");
  for (int i = 0; i < 4; ++i) {
    if (blocks[i] < 1) out.push_back(label + ".blocks[" + std::to_string(i) + "] must be >= 1");
    if (widths[i] < 1) out.push_back(label + ".widths[" + std::to_string(i) + "] must be >= 1");
    if (i > 0 && widths[i] < widths[i - 1]) {
      out.push_back(label + ".widths must be non-decreasing (stage " + std::to_string(i) + ")");
    }
    if (bottleneck && widths[i] % 4 != 0) {
      out.push_back(label + ".widths[" + std::to_string(i) + "] must be divisible by 4 for bottleneck blocks");
    }
  }
  return out;
}

std::string to_string(VariantTag tag) {
  for (const auto& t : kTagNames) {
    if (t.tag == tag) return t.name;
  }
  return "?";
}

VariantTag parse_variant_tag(const std::string& text) {
  for (const auto& t : kTagNames) {
    if (text == t.name) return t.tag;
  }
  throw ValidationError("unknown variant '" + text + "' (expected DFN, mDFN, MPVN, MPVN-M, MPVN-R or MPVN-RM)");
}

const std::array<VariantTag, 6>& all_variant_tags() {
  static const std::array<VariantTag, 6> tags{VariantTag::kDFN,    VariantTag::kMDFN,   VariantTag::kMPVN,
                                              VariantTag::kMPVN_M, VariantTag::kMPVN_R, VariantTag::kMPVN_RM};
  return tags;
}

ModelVariant ModelVariant::from_tag(VariantTag tag, BackboneKind main_kind, BackboneKind aux_kind,
                                    int decoder_width, int num_classes) {
  ModelVariant v;
  v.tag = tag;
  v.decoder_width = decoder_width;
  v.num_classes = num_classes;
  const bool single = tag == VariantTag::kDFN || tag == VariantTag::kMDFN;
  v.multipath = !single;
  v.main = BackboneConfig::preset(main_kind, v.optical_channels + (tag == VariantTag::kMDFN ? v.aux_channels : 0));
  v.aux = BackboneConfig::preset(aux_kind, v.aux_channels);
  switch (tag) {
    case VariantTag::kDFN:
    case VariantTag::kMDFN:
      v.encoder_fusion = EncoderFusion::kNone;
      v.decoder_fusion = DecoderFusion::kCab;
      break;
    case VariantTag::kMPVN:
      v.encoder_fusion = EncoderFusion::kSum;
      v.decoder_fusion = DecoderFusion::kCab;
      break;
    case VariantTag::kMPVN_M:
      v.encoder_fusion = EncoderFusion::kMafb;
      v.decoder_fusion = DecoderFusion::kCab;
      break;
    case VariantTag::kMPVN_R:
      v.encoder_fusion = EncoderFusion::kSum;
      v.decoder_fusion = DecoderFusion::kRafb;
      break;
    case VariantTag::kMPVN_RM:
      v.encoder_fusion = EncoderFusion::kMafb;
      v.decoder_fusion = DecoderFusion::kRafb;
      break;
  }
  return v;
}

std::vector<std::string> ModelVariant::violations() const {
  std::vector<std::string> out = main.violations("main");
  if (multipath) {
    auto a = aux.violations("aux");
    out.insert(out.end(), a.begin(), a.end());
  }
  if (decoder_width < 1) out.push_back("decoder_width must be >= 1");
  if (num_classes < 2) out.push_back("num_classes must be >= 2");
  if (attention_reduction < 1) out.push_back("attention_reduction must be >= 1");
  if (optical_channels < 1) out.push_back("optical_channels must be >= 1");
  if (aux_channels < 1) out.push_back("aux_channels must be >= 1");

  const bool single = tag == VariantTag::kDFN || tag == VariantTag::kMDFN;
  const std::string name = to_string(tag);
  if (single && multipath) out.push_back(name + " has a single encoder path");
  if (!single && !multipath) out.push_back(name + " requires the auxiliary encoder path");
  if (single && encoder_fusion != EncoderFusion::kNone) out.push_back(name + " has no encoder fusion");
  if (!single && encoder_fusion == EncoderFusion::kNone) out.push_back(name + " requires an encoder fusion");
  const bool wants_mafb = tag == VariantTag::kMPVN_M || tag == VariantTag::kMPVN_RM;
  const bool wants_rafb = tag == VariantTag::kMPVN_R || tag == VariantTag::kMPVN_RM;
  if (wants_mafb != (encoder_fusion == EncoderFusion::kMafb)) {
    out.push_back(name + (wants_mafb ? " requires MAFB encoder fusion" : " must not use MAFB"));
  }
  if (wants_rafb != (decoder_fusion == DecoderFusion::kRafb)) {
    out.push_back(name + (wants_rafb ? " requires RAFB decoder fusion" : " must not use RAFB"));
  }
  const int expected_main = optical_channels + (tag == VariantTag::kMDFN ? aux_channels : 0);
  if (main.in_channels != expected_main) {
    out.push_back("main.in_channels is " + std::to_string(main.in_channels) + " but " + name + " feeds " +
                  std::to_string(expected_main));
  }
  if (multipath && aux.in_channels != aux_channels) {
    out.push_back("aux.in_channels is " + std::to_string(aux.in_channels) + " but aux_channels is " +
                  std::to_string(aux_channels));
  }
  return out;
}

void ModelVariant::validate() const {
  auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid model variant:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ValidationError(msg);
}

}  // namespace afnet::arch
