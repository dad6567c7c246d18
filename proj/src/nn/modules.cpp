#include "afnet/nn/modules.hpp"

namespace afnet::nn {

template <typename T>
Conv2d<T> Conv2d<T>::create(ParamBuilder<T> b, std::int64_t in_channels, std::int64_t out_channels, int kernel,
                            int stride, int padding, bool with_bias) {
  if (in_channels < 1 || out_channels < 1 || kernel < 1) {
    throw ValidationError("conv '" + b.qualified("weight") + "' has non-positive geometry");
  }
  Conv2d c;
  c.weight = b.fan_in_uniform("weight", {out_channels, in_channels, kernel, kernel},
                              in_channels * kernel * kernel, ParamKind::kConvWeight);
  if (with_bias) c.bias = b.constant("bias", {out_channels}, T(0), ParamKind::kBias);
  c.stride = stride;
  c.padding = padding;
  return c;
}

template <typename T>
BatchNorm2d<T> BatchNorm2d<T>::create(ParamBuilder<T> b, std::int64_t channels, BatchNormOptions options) {
  BatchNorm2d bn;
  bn.gamma = b.constant("gamma", {channels}, T(1), ParamKind::kNormScale);
  bn.beta = b.constant("beta", {channels}, T(0), ParamKind::kNormShift);
  bn.running_mean = b.constant("running_mean", {channels}, T(0), ParamKind::kRunningMean);
  bn.running_var = b.constant("running_var", {channels}, T(1), ParamKind::kRunningVar);
  bn.options = options;
  return bn;
}

template struct Conv2d<float>;
template struct Conv2d<double>;
template struct BatchNorm2d<float>;
template struct BatchNorm2d<double>;

}  // namespace afnet::nn
