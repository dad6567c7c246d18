#pragma once

#include <vector>

#include "afnet/core/tensor.hpp"

namespace afnet {

enum class BinaryKind { kAdd, kSub, kMul };

/// Elementwise binary op with broadcasting: shapes are right-aligned, and
/// every axis pair must be equal or contain a 1. Gradients are sum-reduced
/// back over broadcast axes.
template <typename T>
Tensor<T> broadcast_binary(BinaryKind kind, const Tensor<T>& a, const Tensor<T>& b);

/// Shape produced by broadcasting `a` against `b`; throws DimensionError
/// naming the first incompatible axis.
Shape broadcast_shape(const Shape& a, const Shape& b);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return broadcast_binary(BinaryKind::kAdd, a, b);
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return broadcast_binary(BinaryKind::kSub, a, b);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return broadcast_binary(BinaryKind::kMul, a, b);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

/// Concatenates rank-4 tensors along the channel axis.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts);

/// Channels [begin, begin + count) of a rank-4 tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count);

/// Mean over the listed axes; reduced axes keep extent 1. An empty axis
/// list is the identity.
template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, const std::vector<int>& axes);

/// Mean over every axis, returned with all extents 1.
template <typename T>
Tensor<T> mean_all(const Tensor<T>& x);

/// Sum over every element, shape [1].
template <typename T>
Tensor<T> sum_all(const Tensor<T>& x);

/// Same data viewed under a new shape with the same element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

}  // namespace afnet
