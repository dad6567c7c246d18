#pragma once

#include <optional>
#include <vector>

#include "afnet/core/labels.hpp"
#include "afnet/core/tensor.hpp"

namespace afnet::train {

/// Mean over non-ignored pixels of -log softmax(logits)[label].
/// logits: [N, K, H, W]; labels: N x H x W with values in [0, K) or
/// `ignore_index`.
template <typename T>
Tensor<T> cross_entropy_loss(const Tensor<T>& logits, const LabelMap& labels,
                             std::optional<int> ignore_index = kIgnoreLabel);

/// Unweighted sum of cross_entropy_loss over every stage.
template <typename T>
Tensor<T> deep_supervision_loss(const std::vector<Tensor<T>>& stage_logits, const LabelMap& labels,
                                std::optional<int> ignore_index = kIgnoreLabel);

/// Fraction of non-ignored pixels whose per-pixel argmax (lowest index on
/// ties) equals the label. Returns 0 when every pixel is ignored.
template <typename T>
double pixel_accuracy(const Tensor<T>& logits, const LabelMap& labels, std::optional<int> ignore_index = kIgnoreLabel);

/// Per-pixel argmax over the class axis of [N, K, H, W]; ties go to the
/// lowest class index.
template <typename T>
LabelMap argmax_classes(const Tensor<T>& scores);

}  // namespace afnet::train
