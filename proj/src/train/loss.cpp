#include "afnet/train/loss.hpp"

#include <cmath>

#include "afnet/core/ops.hpp"

namespace afnet::train {

namespace {

template <typename T>
void check_geometry(const char* where, const Tensor<T>& logits, const LabelMap& labels) {
  if (logits.rank() != 4) throw DimensionError(std::string(where) + ": logits must be [N, K, H, W]");
  if (logits.dim(0) != labels.n || logits.dim(2) != labels.h || logits.dim(3) != labels.w) {
    throw DimensionError(std::string(where) + ": logits " + shape_to_string(logits.shape()) + " vs labels [" +
                         std::to_string(labels.n) + ", " + std::to_string(labels.h) + ", " +
                         std::to_string(labels.w) + "]");
  }
  if (static_cast<std::int64_t>(labels.values.size()) != labels.n * labels.h * labels.w) {
    throw DimensionError(std::string(where) + ": label buffer size does not match its extents");
  }
}

}  // namespace

// Negated log-likelihood (non-negative), categorical over K classes.
template <typename T>
Tensor<T> cross_entropy_loss(const Tensor<T>& logits, const LabelMap& labels, std::optional<int> ignore_index) {
  check_geometry("cross_entropy_loss", logits, labels);
  const std::int64_t n = logits.dim(0), k = logits.dim(1), hw = logits.dim(2) * logits.dim(3);
  const auto& x = logits.vec();

  // Log-probabilities are kept for the backward rule.
  std::vector<T> logp(x.size());
  std::int64_t count = 0;
  double total = 0.0;
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t p = 0; p < hw; ++p) {
      const T* px = x.data() + b * k * hw + p;
      T* lp = logp.data() + b * k * hw + p;
      T m = px[0];
      for (std::int64_t c = 1; c < k; ++c) m = std::max(m, px[c * hw]);
      T s = 0;
      for (std::int64_t c = 0; c < k; ++c) s += std::exp(px[c * hw] - m);
      const T lse = m + std::log(s);
      for (std::int64_t c = 0; c < k; ++c) lp[c * hw] = px[c * hw] - lse;

      const int label = labels.values[static_cast<std::size_t>(b * hw + p)];
      if (ignore_index && label == *ignore_index) continue;
      if (label >= k) {
        throw ValidationError("label " + std::to_string(label) + " at batch " + std::to_string(b) + ", pixel " +
                              std::to_string(p) + " is outside [0, " + std::to_string(k) + ")");
      }
      total -= static_cast<double>(lp[label * hw]);
      ++count;
    }
  }
  if (count == 0) throw DegenerateInputError("cross_entropy_loss: every pixel is ignored");

  auto in = logits.node();
  std::vector<std::uint8_t> lab = labels.values;
  const T inv = T(1) / static_cast<T>(count);
  return make_result<T>(
      "cross_entropy", {1}, {static_cast<T>(total / static_cast<double>(count))}, {in},
      [in, logp = std::move(logp), lab = std::move(lab), ignore_index, n, k, hw, inv](Node<T>& self) {
        if (!in->requires_grad) return;
        auto& g = in->grad_buffer();
        const T go = self.grad[0] * inv;
        for (std::int64_t b = 0; b < n; ++b) {
          for (std::int64_t p = 0; p < hw; ++p) {
            const int label = lab[static_cast<std::size_t>(b * hw + p)];
            if (ignore_index && label == *ignore_index) continue;
            const std::int64_t base = b * k * hw + p;
            for (std::int64_t c = 0; c < k; ++c) {
              const T prob = std::exp(logp[base + c * hw]);
              g[base + c * hw] += go * (prob - (c == label ? T(1) : T(0)));
            }
          }
        }
      });
}

template <typename T>
Tensor<T> deep_supervision_loss(const std::vector<Tensor<T>>& stage_logits, const LabelMap& labels,
                                std::optional<int> ignore_index) {
  if (stage_logits.empty()) throw ContractError("deep_supervision_loss needs at least one stage");
  Tensor<T> total = cross_entropy_loss(stage_logits[0], labels, ignore_index);
  for (std::size_t i = 1; i < stage_logits.size(); ++i) {
    total = add(total, cross_entropy_loss(stage_logits[i], labels, ignore_index));
  }
  return total;
}

template <typename T>
LabelMap argmax_classes(const Tensor<T>& scores) {
  if (scores.rank() != 4) throw DimensionError("argmax_classes expects [N, K, H, W]");
  const std::int64_t n = scores.dim(0), k = scores.dim(1), h = scores.dim(2), w = scores.dim(3);
  LabelMap out(n, h, w);
  const auto& x = scores.vec();
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t p = 0; p < h * w; ++p) {
      const T* px = x.data() + b * k * h * w + p;
      std::int64_t best = 0;
      for (std::int64_t c = 1; c < k; ++c) {
        if (px[c * h * w] > px[best * h * w]) best = c;
      }
      out.values[static_cast<std::size_t>(b * h * w + p)] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

template <typename T>
double pixel_accuracy(const Tensor<T>& logits, const LabelMap& labels, std::optional<int> ignore_index) {
  check_geometry("pixel_accuracy", logits, labels);
  const auto pred = argmax_classes(logits);
  std::int64_t hit = 0, count = 0;
  for (std::size_t i = 0; i < labels.values.size(); ++i) {
    if (ignore_index && labels.values[i] == *ignore_index) continue;
    ++count;
    hit += pred.values[i] == labels.values[i];
  }
  return count == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(count);
}

#define AFNET_INSTANTIATE(T)                                                                                \
  template Tensor<T> cross_entropy_loss(const Tensor<T>&, const LabelMap&, std::optional<int>);            \
  template Tensor<T> deep_supervision_loss(const std::vector<Tensor<T>>&, const LabelMap&, std::optional<int>); \
  template double pixel_accuracy(const Tensor<T>&, const LabelMap&, std::optional<int>);                  \
  template LabelMap argmax_classes(const Tensor<T>&);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)

#undef AFNET_INSTANTIATE

}  // namespace afnet::train
