#include "afnet/arch/backbone.hpp"

#include "afnet/core/ops.hpp"

namespace afnet::arch {

template <typename T>
ResidualBlock<T> ResidualBlock<T>::create(nn::ParamBuilder<T> b, std::int64_t in_channels,
                                          std::int64_t out_channels, int stride, bool bottleneck) {
  ResidualBlock r;
  auto conv = [&](const std::string& name, std::int64_t cin, std::int64_t cout, int k, int s) {
    r.convs.push_back(nn::Conv2d<T>::create(b.scope(name), cin, cout, k, s, k / 2, false));
  };
  if (bottleneck) {
    const std::int64_t mid = out_channels / 4;
    conv("conv1", in_channels, mid, 1, 1);
    conv("conv2", mid, mid, 3, stride);
    conv("conv3", mid, out_channels, 1, 1);
  } else {
    conv("conv1", in_channels, out_channels, 3, stride);
    conv("conv2", out_channels, out_channels, 3, 1);
  }
  for (std::size_t i = 0; i < r.convs.size(); ++i) {
    r.norms.push_back(nn::BatchNorm2d<T>::create(b.scope("bn" + std::to_string(i + 1)), r.convs[i].out_channels()));
  }
  r.has_projection = stride != 1 || in_channels != out_channels;
  if (r.has_projection) {
    r.proj = nn::Conv2d<T>::create(b.scope("proj"), in_channels, out_channels, 1, stride, 0, false);
    r.proj_bn = nn::BatchNorm2d<T>::create(b.scope("proj_bn"), out_channels);
  }
  return r;
}

template <typename T>
Tensor<T> ResidualBlock<T>::operator()(const Tensor<T>& x, nn::NormMode mode) const {
  Tensor<T> y = x;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    y = norms[i](convs[i](y), mode);
    if (i + 1 < convs.size()) y = nn::relu(y);
  }
  const Tensor<T> shortcut = has_projection ? proj_bn(proj(x), mode) : x;
  return nn::relu(add(y, shortcut));
}

template <typename T>
Backbone<T> Backbone<T>::create(nn::ParamBuilder<T> b, const BackboneConfig& config) {
  auto problems = config.violations("backbone");
  if (!problems.empty()) throw ValidationError(problems.front());
  Backbone bb;
  bb.config_ = config;
  bb.stem_ = nn::Conv2d<T>::create(b.scope("stem.conv"), config.in_channels, config.stem_width,
                                   config.stem_kernel, 2, config.stem_kernel / 2, false);
  bb.stem_bn_ = nn::BatchNorm2d<T>::create(b.scope("stem.bn"), config.stem_width);
  std::int64_t channels = config.stem_width;
  for (int s = 0; s < 4; ++s) {
    for (int i = 0; i < config.blocks[s]; ++i) {
      const int stride = (s > 0 && i == 0) ? 2 : 1;
      auto scope = b.scope("layer" + std::to_string(s + 1) + "." + std::to_string(i));
      bb.stages_[s].push_back(ResidualBlock<T>::create(scope, channels, config.widths[s], stride, config.bottleneck));
      channels = config.widths[s];
    }
  }
  return bb;
}

template <typename T>
StageFeatures<T> Backbone<T>::operator()(const Tensor<T>& x, nn::NormMode mode) const {
  if (x.rank() != 4 || x.dim(1) != config_.in_channels) {
    throw DimensionError("backbone expects [N, " + std::to_string(config_.in_channels) + ", H, W], got " +
                         shape_to_string(x.shape()));
  }
  if (x.dim(2) % 32 != 0 || x.dim(3) % 32 != 0 || x.dim(2) == 0 || x.dim(3) == 0) {
    throw GeometryError("input extent " + std::to_string(x.dim(2)) + "x" + std::to_string(x.dim(3)) +
                        " is not a positive multiple of 32");
  }
  auto y = nn::max_pool2d(nn::relu(stem_bn_(stem_(x), mode)), 2, 2);
  StageFeatures<T> out;
  for (int s = 0; s < 4; ++s) {
    for (const auto& block : stages_[s]) y = block(y, mode);
    out[s] = y;
  }
  return out;
}

template struct ResidualBlock<float>;
template struct ResidualBlock<double>;
template class Backbone<float>;
template class Backbone<double>;

}  // namespace afnet::arch
