#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "afnet/arch/backbone.hpp"
#include "afnet/arch/blocks.hpp"
#include "afnet/arch/variant.hpp"

namespace afnet::arch {

/// Stride of decoder stage i in output order (coarse to fine).
constexpr std::array<int, 4> kDecoderStrides{32, 16, 8, 4};

template <typename T>
struct EncoderFeatures {
  StageFeatures<T> main;
  std::optional<StageFeatures<T>> aux;
};

/// An assembled segmentation network: encoder branch(es), per-stage encoder
/// fusion, and a top-down decoder with one logits head per stage.
///
/// Parameter names are stable across variants (`main.*`, `aux.*`,
/// `fuse.s<stride>.*`, `dec.*`, `head.s<stride>.*`), so weights for shared
/// components can be copied between variants by name.
template <typename T>
class AfNetModel {
 public:
  /// Validates the variant and initializes every parameter from `seed`.
  static AfNetModel build(const ModelVariant& variant, std::uint64_t seed);

  const ModelVariant& variant() const { return variant_; }
  const nn::ParamStore<T>& params() const { return *params_; }

  /// Per-branch stage features. `aux_in` must be defined exactly when the
  /// variant has an auxiliary branch.
  EncoderFeatures<T> mpe_forward(const Tensor<T>& main_in, const Tensor<T>& aux_in, nn::NormMode mode) const;

  /// Stage logits at strides 32, 16, 8, 4, each upsampled to the input
  /// extent. For the stacked variant `aux_in` is concatenated onto
  /// `main_in` when given; otherwise `main_in` must already carry it.
  std::vector<Tensor<T>> forward(const Tensor<T>& main_in, const Tensor<T>& aux_in, nn::NormMode mode,
                                 FeatureSink<T>* sink = nullptr) const;

  /// Finest-stage logits, the map used for prediction.
  Tensor<T> predict_logits(const Tensor<T>& main_in, const Tensor<T>& aux_in) const;

  /// Channel width of the fused encoder feature at stage i.
  std::int64_t fused_channels(int stage) const;

 private:
  struct StageFusion {
    std::optional<nn::Conv2d<T>> aux_proj;
    std::optional<MafbParams<T>> mafb;
  };
  struct DecoderStage {
    RrbParams<T> rrb_in;
    RrbParams<T> rrb_out;
    std::optional<CabParams<T>> cab;
    std::optional<RafbParams<T>> rafb;
    nn::Conv2d<T> head;
  };

  Tensor<T> fuse_stage(int stage, const EncoderFeatures<T>& enc, nn::NormMode mode, FeatureSink<T>* sink) const;

  ModelVariant variant_;
  std::shared_ptr<nn::ParamStore<T>> params_;
  Backbone<T> main_;
  std::optional<Backbone<T>> aux_;
  std::array<StageFusion, 4> fusion_;  // indexed by encoder stage (stride 4..32)
  GlobalContextParams<T> gc_;
  std::array<DecoderStage, 4> decoder_;  // indexed by encoder stage
};

/// MPVN-RM -> MPVN-R and MPVN-M -> MPVN: the same network with the
/// encoder attention fusion replaced by summation.
ModelVariant without_mafb(const ModelVariant& variant);

}  // namespace afnet::arch
