#pragma once

#include <array>
#include <vector>

#include "afnet/arch/variant.hpp"
#include "afnet/nn/modules.hpp"

namespace afnet::arch {

/// Basic (two 3x3) or bottleneck (1x1, 3x3, 1x1) residual block with a
/// projection shortcut whenever stride or width changes.
template <typename T>
struct ResidualBlock {
  std::vector<nn::Conv2d<T>> convs;
  std::vector<nn::BatchNorm2d<T>> norms;
  bool has_projection = false;
  nn::Conv2d<T> proj;
  nn::BatchNorm2d<T> proj_bn;

  static ResidualBlock create(nn::ParamBuilder<T> b, std::int64_t in_channels, std::int64_t out_channels,
                              int stride, bool bottleneck);
  Tensor<T> operator()(const Tensor<T>& x, nn::NormMode mode) const;
};

template <typename T>
using StageFeatures = std::array<Tensor<T>, 4>;  // strides 4, 8, 16, 32

template <typename T>
class Backbone {
 public:
  static Backbone create(nn::ParamBuilder<T> b, const BackboneConfig& config);

  const BackboneConfig& config() const { return config_; }
  /// x: [N, in_channels, H, W] with H and W divisible by 32.
  StageFeatures<T> operator()(const Tensor<T>& x, nn::NormMode mode) const;

 private:
  BackboneConfig config_;
  nn::Conv2d<T> stem_;
  nn::BatchNorm2d<T> stem_bn_;
  std::array<std::vector<ResidualBlock<T>>, 4> stages_;
};

}  // namespace afnet::arch
