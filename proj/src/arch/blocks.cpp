#include "afnet/arch/blocks.hpp"

#include <algorithm>

#include "afnet/core/ops.hpp"

namespace afnet::arch {

namespace {

void require_same_geometry(const char* where, const Shape& a, const Shape& b) {
  if (a.size() != 4 || b.size() != 4 || a[0] != b[0] || a[2] != b[2] || a[3] != b[3]) {
    throw DimensionError(std::string(where) + ": inputs " + shape_to_string(a) + " and " + shape_to_string(b) +
                         " must share N, H and W");
  }
}

void require_channels(const char* where, const Shape& x, std::int64_t expected) {
  if (x.size() != 4 || x[1] != expected) {
    throw DimensionError(std::string(where) + ": expected " + std::to_string(expected) + " channels, got " +
                         shape_to_string(x));
  }
}

}  // namespace

template <typename T>
AttentionParams<T> AttentionParams<T>::create(nn::ParamBuilder<T> b, std::int64_t in_channels,
                                              std::int64_t out_channels, int reduction) {
  if (reduction < 1) throw ValidationError("attention reduction must be >= 1");
  const std::int64_t hidden = std::max<std::int64_t>(1, in_channels / reduction);
  AttentionParams p;
  p.conv1 = nn::Conv2d<T>::create(b.scope("conv1"), in_channels, hidden, 1);
  p.conv2 = nn::Conv2d<T>::create(b.scope("conv2"), hidden, out_channels, 1);
  p.reduction = reduction;
  return p;
}

template <typename T>
Tensor<T> channel_attention(const Tensor<T>& x, const AttentionParams<T>& p) {
  require_channels("channel_attention", x.shape(), p.in_channels());
  return nn::sigmoid(p.conv2(nn::relu(p.conv1(nn::global_avg_pool(x)))));
}

template <typename T>
Tensor<T> spatial_attention(const Tensor<T>& x, const AttentionParams<T>& p) {
  require_channels("spatial_attention", x.shape(), p.in_channels());
  if (p.out_channels() != 1) throw DimensionError("spatial_attention: conv2 must output one channel");
  return nn::sigmoid(p.conv2(nn::relu(p.conv1(x))));
}

template <typename T>
RrbParams<T> RrbParams<T>::create(nn::ParamBuilder<T> b, std::int64_t in_channels, std::int64_t width) {
  RrbParams p;
  p.unify = nn::Conv2d<T>::create(b.scope("unify"), in_channels, width, 1);
  p.conv_a = nn::Conv2d<T>::create(b.scope("conv_a"), width, width, 3, 1, 1, false);
  p.bn = nn::BatchNorm2d<T>::create(b.scope("bn"), width);
  p.conv_b = nn::Conv2d<T>::create(b.scope("conv_b"), width, width, 3, 1, 1);
  return p;
}

template <typename T>
Tensor<T> rrb(const Tensor<T>& x, const RrbParams<T>& p, nn::NormMode mode) {
  require_channels("rrb", x.shape(), p.unify.in_channels());
  auto unified = p.unify(x);
  auto refined = p.conv_b(nn::relu(p.bn(p.conv_a(unified), mode)));
  return nn::relu(add(unified, refined));
}

template <typename T>
CabParams<T> CabParams<T>::create(nn::ParamBuilder<T> b, std::int64_t width, int reduction) {
  CabParams p;
  p.ca = AttentionParams<T>::create(b.scope("ca"), 2 * width, width, reduction);
  return p;
}

template <typename T>
Tensor<T> cab_fuse(const Tensor<T>& low, const Tensor<T>& high, const CabParams<T>& p, FeatureSink<T>* sink,
                   const std::string& tag) {
  require_same_geometry("cab_fuse", low.shape(), high.shape());
  auto w = channel_attention(concat_channels<T>({low, high}), p.ca);
  if (sink) sink->record(tag + ".ca", w);
  return add(mul(w, low), high);
}

template <typename T>
MafbParams<T> MafbParams<T>::create(nn::ParamBuilder<T> b, std::int64_t main_channels, std::int64_t aux_channels,
                                    std::int64_t width, int reduction) {
  MafbParams p;
  p.rrb_main = RrbParams<T>::create(b.scope("rrb_main"), main_channels, width);
  p.rrb_aux = RrbParams<T>::create(b.scope("rrb_aux"), aux_channels, width);
  p.sa = AttentionParams<T>::create(b.scope("sa"), 2 * width, 1, reduction);
  p.ca = AttentionParams<T>::create(b.scope("ca"), 2 * width, 2 * width, reduction);
  p.reduce = nn::Conv2d<T>::create(b.scope("reduce"), 4 * width, width, 1);
  return p;
}

template <typename T>
Tensor<T> mafb_fuse(const Tensor<T>& main_f, const Tensor<T>& aux_f, const MafbParams<T>& p, nn::NormMode mode,
                    FeatureSink<T>* sink, const std::string& tag) {
  require_same_geometry("mafb_fuse", main_f.shape(), aux_f.shape());
  auto xc = concat_channels<T>({rrb(main_f, p.rrb_main, mode), rrb(aux_f, p.rrb_aux, mode)});
  auto sa = spatial_attention(xc, p.sa);
  auto ca = channel_attention(xc, p.ca);
  if (sink) {
    sink->record(tag + ".sa", sa);
    sink->record(tag + ".ca", ca);
  }
  return p.reduce(concat_channels<T>({mul(sa, xc), mul(ca, xc)}));
}

template <typename T>
RafbParams<T> RafbParams<T>::create(nn::ParamBuilder<T> b, std::int64_t width, int reduction, bool caption_order) {
  RafbParams p;
  p.ca = AttentionParams<T>::create(b.scope("ca"), 2 * width, width, reduction);
  p.sa = AttentionParams<T>::create(b.scope("sa"), 2 * width, 1, reduction);
  p.caption_order = caption_order;
  return p;
}

template <typename T>
Tensor<T> rafb_fuse(const Tensor<T>& low, const Tensor<T>& high, const RafbParams<T>& p, FeatureSink<T>* sink,
                    const std::string& tag) {
  require_same_geometry("rafb_fuse", low.shape(), high.shape());
  if (low.dim(1) != high.dim(1)) {
    throw DimensionError("rafb_fuse: low " + shape_to_string(low.shape()) + " and high " +
                         shape_to_string(high.shape()) + " differ in width");
  }
  auto xc = concat_channels<T>({low, high});
  auto ca = channel_attention(xc, p.ca);
  auto sa = spatial_attention(xc, p.sa);
  if (sink) {
    sink->record(tag + ".ca", ca);
    sink->record(tag + ".sa", sa);
  }
  if (p.caption_order) return add(mul(sa, low), mul(ca, high));
  return add(mul(ca, low), mul(sa, high));
}

template <typename T>
GlobalContextParams<T> GlobalContextParams<T>::create(nn::ParamBuilder<T> b, std::int64_t in_channels,
                                                      std::int64_t width) {
  GlobalContextParams p;
  p.conv = nn::Conv2d<T>::create(b.scope("conv"), in_channels, width, 1);
  return p;
}

template <typename T>
Tensor<T> global_context(const Tensor<T>& top, const GlobalContextParams<T>& p) {
  require_channels("global_context", top.shape(), p.conv.in_channels());
  return p.conv(nn::global_avg_pool(top));
}

#define AFNET_INSTANTIATE(T)                                                                                    \
  template struct AttentionParams<T>;                                                                           \
  template struct RrbParams<T>;                                                                                 \
  template struct CabParams<T>;                                                                                 \
  template struct MafbParams<T>;                                                                                \
  template struct RafbParams<T>;                                                                                \
  template struct GlobalContextParams<T>;                                                                       \
  template Tensor<T> channel_attention(const Tensor<T>&, const AttentionParams<T>&);                            \
  template Tensor<T> spatial_attention(const Tensor<T>&, const AttentionParams<T>&);                            \
  template Tensor<T> rrb(const Tensor<T>&, const RrbParams<T>&, nn::NormMode);                                  \
  template Tensor<T> cab_fuse(const Tensor<T>&, const Tensor<T>&, const CabParams<T>&, FeatureSink<T>*,          \
                              const std::string&);                                                              \
  template Tensor<T> mafb_fuse(const Tensor<T>&, const Tensor<T>&, const MafbParams<T>&, nn::NormMode,           \
                               FeatureSink<T>*, const std::string&);                                            \
  template Tensor<T> rafb_fuse(const Tensor<T>&, const Tensor<T>&, const RafbParams<T>&, FeatureSink<T>*,        \
                               const std::string&);                                                             \
  template Tensor<T> global_context(const Tensor<T>&, const GlobalContextParams<T>&);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)

#undef AFNET_INSTANTIATE

}  // namespace afnet::arch
