#pragma once

#include <optional>

#include "afnet/core/tensor.hpp"

namespace afnet::nn {

/// Direct cross-correlation (no kernel flip) with zero padding.
/// x: [N, C_in, H, W], weight: [C_out, C_in, k, k], bias: [C_out] or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, int stride, int padding);

/// Output extent of a k-window sliding with `stride` over `in + 2*padding`.
std::int64_t conv_output_extent(std::int64_t in, int k, int stride, int padding);

enum class NormMode { kTrain, kEval };

struct BatchNormOptions {
  double momentum = 0.1;
  double epsilon = 1e-5;
};

/// Per-channel batch normalization. Train mode normalizes by biased batch
/// statistics and folds them into the running buffers (running_var takes
/// the unbiased estimate); eval mode normalizes by the running buffers.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     const Tensor<T>& running_mean, const Tensor<T>& running_var, NormMode mode,
                     const BatchNormOptions& options = {});

enum class Activation { kRelu, kSigmoid };

/// Sigmoid saturates at the nearest representable values inside (0, 1).
template <typename T>
Tensor<T> activation(const Tensor<T>& x, Activation kind);

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return activation(x, Activation::kRelu);
}
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return activation(x, Activation::kSigmoid);
}

/// Window maximum; ties resolve to the first element in row-major window
/// order, and backward routes the gradient there.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, int k, int stride);

/// [N, C, H, W] -> [N, C, 1, 1] spatial mean.
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x);

enum class UpsampleMapping { kHalfPixel, kAlignCorners };

template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& x, int scale, UpsampleMapping mapping = UpsampleMapping::kHalfPixel);

/// Softmax across the channel axis of [N, K, H, W], independently per pixel.
template <typename T>
Tensor<T> softmax_over_classes(const Tensor<T>& logits);

}  // namespace afnet::nn
