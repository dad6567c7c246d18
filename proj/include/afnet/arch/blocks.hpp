#pragma once

#include <string>
#include <utility>
#include <vector>

#include "afnet/nn/modules.hpp"

namespace afnet::arch {

/// Named intermediate maps captured during a forward pass (attention
/// weights for feature dumps). Pass nullptr to skip recording.
template <typename T>
struct FeatureSink {
  std::vector<std::pair<std::string, Tensor<T>>> maps;
  void record(const std::string& name, const Tensor<T>& t) { maps.emplace_back(name, t); }
};

/// Two 1x1 convs with bias: C_in -> max(1, C_in / r) -> C_att.
template <typename T>
struct AttentionParams {
  nn::Conv2d<T> conv1;
  nn::Conv2d<T> conv2;
  int reduction = 16;

  static AttentionParams create(nn::ParamBuilder<T> b, std::int64_t in_channels, std::int64_t out_channels,
                                int reduction);
  std::int64_t in_channels() const { return conv1.in_channels(); }
  std::int64_t out_channels() const { return conv2.out_channels(); }
};

/// sigmoid(conv2(relu(conv1(gap(x))))) -> [N, C_att, 1, 1]
template <typename T>
Tensor<T> channel_attention(const Tensor<T>& x, const AttentionParams<T>& p);

/// sigmoid(conv2(relu(conv1(x)))) -> [N, 1, H, W]
template <typename T>
Tensor<T> spatial_attention(const Tensor<T>& x, const AttentionParams<T>& p);

/// Refinement residual block.
template <typename T>
struct RrbParams {
  nn::Conv2d<T> unify;  // 1x1, C_in -> D
  nn::Conv2d<T> conv_a;  // 3x3, no bias (followed by BN)
  nn::BatchNorm2d<T> bn;
  nn::Conv2d<T> conv_b;  // 3x3

  static RrbParams create(nn::ParamBuilder<T> b, std::int64_t in_channels, std::int64_t width);
};

/// x' = unify(x); y = relu(x' + conv_b(relu(bn(conv_a(x'))))).
template <typename T>
Tensor<T> rrb(const Tensor<T>& x, const RrbParams<T>& p, nn::NormMode mode);

/// Baseline channel attention block.
template <typename T>
struct CabParams {
  AttentionParams<T> ca;  // 2D -> D

  static CabParams create(nn::ParamBuilder<T> b, std::int64_t width, int reduction);
};

/// CA(low ++ high) * low + high.
template <typename T>
Tensor<T> cab_fuse(const Tensor<T>& low, const Tensor<T>& high, const CabParams<T>& p,
                   FeatureSink<T>* sink = nullptr, const std::string& tag = {});

/// Encoder-side fusion of the optical and auxiliary branches.
template <typename T>
struct MafbParams {
  RrbParams<T> rrb_main;
  RrbParams<T> rrb_aux;
  AttentionParams<T> sa;  // 2D -> 1
  AttentionParams<T> ca;  // 2D -> 2D
  nn::Conv2d<T> reduce;   // 1x1, 4D -> D

  static MafbParams create(nn::ParamBuilder<T> b, std::int64_t main_channels, std::int64_t aux_channels,
                           std::int64_t width, int reduction);
};

/// xc = rrb(main) ++ rrb(aux); y = reduce((SA(xc) * xc) ++ (CA(xc) * xc)).
template <typename T>
Tensor<T> mafb_fuse(const Tensor<T>& main_f, const Tensor<T>& aux_f, const MafbParams<T>& p, nn::NormMode mode,
                    FeatureSink<T>* sink = nullptr, const std::string& tag = {});

/// Decoder-side fusion of low-level and upsampled high-level features.
template <typename T>
struct RafbParams {
  AttentionParams<T> ca;  // 2D -> D
  AttentionParams<T> sa;  // 2D -> 1
  bool caption_order = false;

  static RafbParams create(nn::ParamBuilder<T> b, std::int64_t width, int reduction, bool caption_order = false);
};

/// xc = low ++ high; y = CA(xc) * low + SA(xc) * high.
/// With `caption_order` the weights swap targets: SA(xc) * low + CA(xc) * high.
template <typename T>
Tensor<T> rafb_fuse(const Tensor<T>& low, const Tensor<T>& high, const RafbParams<T>& p,
                    FeatureSink<T>* sink = nullptr, const std::string& tag = {});

template <typename T>
struct GlobalContextParams {
  nn::Conv2d<T> conv;  // 1x1, C -> D

  static GlobalContextParams create(nn::ParamBuilder<T> b, std::int64_t in_channels, std::int64_t width);
};

/// conv(gap(top)) -> [N, D, 1, 1]
template <typename T>
Tensor<T> global_context(const Tensor<T>& top, const GlobalContextParams<T>& p);

}  // namespace afnet::arch
