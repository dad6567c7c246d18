#pragma once

#include <functional>
#include <string>
#include <vector>

#include "afnet/core/labels.hpp"
#include "afnet/core/tensor.hpp"
#include "afnet/geo/dihedral.hpp"

namespace afnet::geo {

/// Maps [N, C, H, W] optical input (and an aux tensor, possibly undefined)
/// to [N, K, H, W] class logits.
template <typename T>
using LogitsFn = std::function<Tensor<T>(const Tensor<T>& image, const Tensor<T>& aux)>;

/// Named transform sets: "none" (identity), "flips" (identity, horizontal,
/// vertical, both) and "full" (all eight).
std::vector<Dihedral> tta_transforms(const std::string& name);

/// Sum over `transforms` of t^-1(softmax(f(t(image), t(aux)))). The set must
/// contain the identity and no repeats (ContractError). Runs without
/// recording a graph.
template <typename T>
Tensor<T> tta_probabilities(const LogitsFn<T>& f, const Tensor<T>& image, const Tensor<T>& aux,
                            const std::vector<Dihedral>& transforms);

/// Argmax of the summed probabilities, lowest class index on ties.
template <typename T>
LabelMap tta_predict(const LogitsFn<T>& f, const Tensor<T>& image, const Tensor<T>& aux,
                     const std::vector<Dihedral>& transforms);

/// Applies `d` to every [H, W] plane of an [N, C, H, W] tensor (no graph).
template <typename T>
Tensor<T> transform_tensor(const Tensor<T>& x, Dihedral d);

}  // namespace afnet::geo
