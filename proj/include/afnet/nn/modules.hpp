#pragma once

#include "afnet/nn/layers.hpp"
#include "afnet/nn/param_store.hpp"

namespace afnet::nn {

/// Conv2d parameters plus geometry. Weight is [C_out, C_in, k, k].
template <typename T>
struct Conv2d {
  Tensor<T> weight;
  Tensor<T> bias;  // undefined when the conv has no bias
  int stride = 1;
  int padding = 0;

  static Conv2d create(ParamBuilder<T> b, std::int64_t in_channels, std::int64_t out_channels, int kernel,
                       int stride = 1, int padding = 0, bool with_bias = true);

  Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, weight, bias, stride, padding); }
  std::int64_t in_channels() const { return weight.dim(1); }
  std::int64_t out_channels() const { return weight.dim(0); }
};

template <typename T>
struct BatchNorm2d {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  BatchNormOptions options;

  static BatchNorm2d create(ParamBuilder<T> b, std::int64_t channels, BatchNormOptions options = {});

  Tensor<T> operator()(const Tensor<T>& x, NormMode mode) const {
    return batch_norm(x, gamma, beta, running_mean, running_var, mode, options);
  }
};

}  // namespace afnet::nn
