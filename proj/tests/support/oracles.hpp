#pragma once

// Independent reference implementations used as test oracles. They work on
// plain vectors and share no code with the library's kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "afnet/core/tensor.hpp"

namespace oracle {

template <typename T>
afnet::Tensor<T> random_tensor(afnet::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<T> v(static_cast<std::size_t>(afnet::shape_numel(shape)));
  for (auto& x : v) x = static_cast<T>(dist(rng));
  return afnet::Tensor<T>::from_data(std::move(shape), std::move(v));
}

/// Bias first, then (ci, ky, kx) ascending, skipping out-of-range taps.
template <typename T>
std::vector<T> naive_conv2d(const std::vector<T>& x, int n, int cin, int h, int w, const std::vector<T>& wt, int cout,
                            int k, const std::vector<T>* bias, int stride, int pad, int& ho, int& wo) {
  ho = (h + 2 * pad - k) / stride + 1;
  wo = (w + 2 * pad - k) / stride + 1;
  std::vector<T> out(static_cast<std::size_t>(n * cout * ho * wo));
  for (int b = 0; b < n; ++b)
    for (int co = 0; co < cout; ++co)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          T acc = bias ? (*bias)[co] : T(0);
          for (int ci = 0; ci < cin; ++ci)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += wt[((co * cin + ci) * k + ky) * k + kx] * x[((b * cin + ci) * h + iy) * w + ix];
              }
          out[((b * cout + co) * ho + oy) * wo + ox] = acc;
        }
  return out;
}

template <typename T>
std::vector<T> naive_max_pool(const std::vector<T>& x, int nc, int h, int w, int k, int s, int& ho, int& wo) {
  ho = (h - k) / s + 1;
  wo = (w - k) / s + 1;
  std::vector<T> out;
  for (int i = 0; i < nc; ++i)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        T best = -INFINITY;
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) best = std::max(best, x[(i * h + oy * s + ky) * w + ox * s + kx]);
        out.push_back(best);
      }
  return out;
}

/// Half-pixel bilinear sampling written from the textbook formula:
/// sample the continuous image at ((d + 0.5) / s - 0.5) with edge clamping.
inline double bilinear_sample(const std::vector<double>& img, int h, int w, double y, double x) {
  y = std::min(std::max(y, 0.0), h - 1.0);
  x = std::min(std::max(x, 0.0), w - 1.0);
  const int y0 = static_cast<int>(y), x0 = static_cast<int>(x);
  const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
  const double dy = y - y0, dx = x - x0;
  auto at = [&](int yy, int xx) { return img[yy * w + xx]; };
  return at(y0, x0) * (1 - dy) * (1 - dx) + at(y0, x1) * (1 - dy) * dx + at(y1, x0) * dy * (1 - dx) +
         at(y1, x1) * dy * dx;
}

inline std::vector<double> softmax_pixel(const std::vector<double>& logits) {
  std::vector<double> e(logits.size());
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += (e[i] = std::exp(logits[i]));
  for (auto& v : e) v /= total;
  return e;
}

/// Mean over non-ignored pixels of log(sum_k exp(z_k)) - z_label, computed
/// without max-shifting on NCHW logits.
inline double naive_cross_entropy(const std::vector<double>& logits, int n, int k, int h, int w,
                                  const std::vector<std::uint8_t>& labels, int ignore = 255) {
  double total = 0.0;
  int counted = 0;
  for (int b = 0; b < n; ++b)
    for (int p = 0; p < h * w; ++p) {
      const int label = labels[static_cast<std::size_t>(b * h * w + p)];
      if (label == ignore) continue;
      double z = 0.0;
      for (int c = 0; c < k; ++c) z += std::exp(logits[static_cast<std::size_t>((b * k + c) * h * w + p)]);
      total += std::log(z) - logits[static_cast<std::size_t>((b * k + label) * h * w + p)];
      ++counted;
    }
  return total / counted;
}

/// counts[t * k + p] over pixels whose truth is not `ignore`.
inline std::vector<std::uint64_t> naive_confusion(const std::vector<std::uint8_t>& pred,
                                                  const std::vector<std::uint8_t>& truth, int k, int ignore = 255) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k * k), 0);
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] != ignore) ++counts[static_cast<std::size_t>(truth[i] * k + pred[i])];
  return counts;
}

struct PixelScores {
  double oa = 0.0;
  std::vector<double> precision, recall, f1;
};

/// Scores by scanning pixels directly; 0/0 ratios read as 0.
inline PixelScores naive_scores(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth, int k,
                                int ignore = 255) {
  PixelScores s;
  double hits = 0.0, total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == ignore) continue;
    total += 1.0;
    hits += pred[i] == truth[i];
  }
  s.oa = total == 0.0 ? 0.0 : hits / total;
  for (int c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == ignore) continue;
      tp += truth[i] == c && pred[i] == c;
      fp += truth[i] != c && pred[i] == c;
      fn += truth[i] == c && pred[i] != c;
    }
    const double p = tp + fp == 0 ? 0 : tp / (tp + fp), r = tp + fn == 0 ? 0 : tp / (tp + fn);
    s.precision.push_back(p);
    s.recall.push_back(r);
    s.f1.push_back(p + r == 0 ? 0 : 2 * p * r / (p + r));
  }
  return s;
}

}  // namespace oracle
