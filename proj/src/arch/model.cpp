#include "afnet/arch/model.hpp"

#include <random>

#include "afnet/core/ops.hpp"

namespace afnet::arch {

namespace {

std::string stride_name(int stage) { return "s" + std::to_string(4 << stage); }

}  // namespace

template <typename T>
AfNetModel<T> AfNetModel<T>::build(const ModelVariant& variant, std::uint64_t seed) {
  variant.validate();
  AfNetModel m;
  m.variant_ = variant;
  m.params_ = std::make_shared<nn::ParamStore<T>>();
  std::mt19937_64 rng(seed);
  nn::ParamBuilder<T> root(*m.params_, rng);
  const std::int64_t d = variant.decoder_width;
  const int r = variant.attention_reduction;

  m.main_ = Backbone<T>::create(root.scope("main"), variant.main);
  if (variant.multipath) m.aux_ = Backbone<T>::create(root.scope("aux"), variant.aux);

  for (int s = 0; s < 4; ++s) {
    auto scope = root.scope("fuse." + stride_name(s));
    const std::int64_t mw = variant.main.widths[s];
    if (variant.encoder_fusion == EncoderFusion::kMafb) {
      m.fusion_[s].mafb = MafbParams<T>::create(scope.scope("mafb"), mw, variant.aux.widths[s], d, r);
    } else if (variant.encoder_fusion == EncoderFusion::kSum && variant.aux.widths[s] != mw) {
      m.fusion_[s].aux_proj = nn::Conv2d<T>::create(scope.scope("aux_proj"), variant.aux.widths[s], mw, 1);
    }
  }

  m.gc_ = GlobalContextParams<T>::create(root.scope("dec.gc"), m.fused_channels(3), d);
  for (int s = 3; s >= 0; --s) {
    auto scope = root.scope("dec." + stride_name(s));
    auto& st = m.decoder_[s];
    st.rrb_in = RrbParams<T>::create(scope.scope("rrb_in"), m.fused_channels(s), d);
    if (s < 3) {
      if (variant.decoder_fusion == DecoderFusion::kRafb) {
        st.rafb = RafbParams<T>::create(scope.scope("rafb"), d, r, variant.rafb_caption_order);
      } else {
        st.cab = CabParams<T>::create(scope.scope("cab"), d, r);
      }
    }
    st.rrb_out = RrbParams<T>::create(scope.scope("rrb_out"), d, d);
    st.head = nn::Conv2d<T>::create(root.scope("head." + stride_name(s)), d, variant.num_classes, 1);
  }
  return m;
}

template <typename T>
std::int64_t AfNetModel<T>::fused_channels(int stage) const {
  if (variant_.encoder_fusion == EncoderFusion::kMafb) return variant_.decoder_width;
  return variant_.main.widths[stage];
}

template <typename T>
EncoderFeatures<T> AfNetModel<T>::mpe_forward(const Tensor<T>& main_in, const Tensor<T>& aux_in,
                                              nn::NormMode mode) const {
  if (aux_ && !aux_in.defined()) {
    throw ContractError(to_string(variant_.tag) + " requires an auxiliary input");
  }
  if (!aux_ && aux_in.defined()) {
    throw ContractError(to_string(variant_.tag) + " has no auxiliary branch but an auxiliary input was given");
  }
  EncoderFeatures<T> out;
  out.main = main_(main_in, mode);
  if (aux_) {
    if (aux_in.rank() != 4 || aux_in.dim(0) != main_in.dim(0) || aux_in.dim(2) != main_in.dim(2) ||
        aux_in.dim(3) != main_in.dim(3)) {
      throw DimensionError("auxiliary input " + shape_to_string(aux_in.shape()) + " does not match main input " +
                           shape_to_string(main_in.shape()));
    }
    out.aux = (*aux_)(aux_in, mode);
  }
  return out;
}

template <typename T>
Tensor<T> AfNetModel<T>::fuse_stage(int stage, const EncoderFeatures<T>& enc, nn::NormMode mode,
                                    FeatureSink<T>* sink) const {
  const auto& f = fusion_[stage];
  const auto& main_f = enc.main[stage];
  if (!enc.aux) return main_f;
  const auto& aux_f = (*enc.aux)[stage];
  if (f.mafb) return mafb_fuse(main_f, aux_f, *f.mafb, mode, sink, "fuse." + stride_name(stage) + ".mafb");
  return add(main_f, f.aux_proj ? (*f.aux_proj)(aux_f) : aux_f);
}

template <typename T>
std::vector<Tensor<T>> AfNetModel<T>::forward(const Tensor<T>& main_in, const Tensor<T>& aux_in,
                                              nn::NormMode mode, FeatureSink<T>* sink) const {
  EncoderFeatures<T> enc;
  if (variant_.stacks_aux() && aux_in.defined()) {
    enc = mpe_forward(concat_channels<T>({main_in, aux_in}), Tensor<T>(), mode);
  } else {
    enc = mpe_forward(main_in, aux_in, mode);
  }

  std::vector<Tensor<T>> logits;
  Tensor<T> deeper;
  for (int s = 3; s >= 0; --s) {
    const auto& st = decoder_[s];
    const auto fused = fuse_stage(s, enc, mode, sink);
    auto low = rrb(fused, st.rrb_in, mode);
    Tensor<T> merged;
    if (s == 3) {
      merged = add(low, global_context(fused, gc_));
    } else {
      auto high = nn::bilinear_upsample(deeper, 2, variant_.upsample);
      const std::string tag = "dec." + stride_name(s);
      merged = st.rafb ? rafb_fuse(low, high, *st.rafb, sink, tag + ".rafb")
                       : cab_fuse(low, high, *st.cab, sink, tag + ".cab");
    }
    deeper = rrb(merged, st.rrb_out, mode);
    logits.push_back(nn::bilinear_upsample(st.head(deeper), 4 << s, variant_.upsample));
  }
  return logits;
}

template <typename T>
Tensor<T> AfNetModel<T>::predict_logits(const Tensor<T>& main_in, const Tensor<T>& aux_in) const {
  NoGradGuard guard;
  return forward(main_in, aux_in, nn::NormMode::kEval).back();
}

ModelVariant without_mafb(const ModelVariant& variant) {
  ModelVariant v = variant;
  if (v.encoder_fusion != EncoderFusion::kMafb) return v;
  v.encoder_fusion = EncoderFusion::kSum;
  v.tag = v.tag == VariantTag::kMPVN_RM ? VariantTag::kMPVN_R : VariantTag::kMPVN;
  return v;
}

template class AfNetModel<float>;
template class AfNetModel<double>;

}  // namespace afnet::arch
