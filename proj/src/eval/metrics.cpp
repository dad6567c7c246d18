#include "afnet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afnet/core/errors.hpp"

namespace afnet::eval {

ConfusionMatrix::ConfusionMatrix(int classes) : k_(classes) {
  if (classes < 1) throw ValidationError("confusion matrix needs at least one class");
  counts_.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0);
}

std::size_t ConfusionMatrix::index(int truth, int pred) const {
  if (truth < 0 || truth >= k_ || pred < 0 || pred >= k_) {
    throw ContractError("confusion matrix index (" + std::to_string(truth) + ", " + std::to_string(pred) +
                        ") outside " + std::to_string(k_) + " classes");
  }
  return static_cast<std::size_t>(truth) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(pred);
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto v : counts_) s += v;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (int c = 0; c < k_; ++c) s += at(c, c);
  return s;
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t s = 0;
  for (int p = 0; p < k_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(int pred) const {
  std::uint64_t s = 0;
  for (int t = 0; t < k_; ++t) s += at(t, pred);
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) {
    throw DimensionError("cannot add confusion matrices over " + std::to_string(k_) + " and " +
                         std::to_string(other.k_) + " classes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion_matrix(const LabelMap& pred, const LabelMap& truth, int classes, const IgnoreMask* mask) {
  if (pred.n != truth.n || pred.h != truth.h || pred.w != truth.w || pred.size() != truth.size()) {
    throw DimensionError("prediction " + std::to_string(pred.n) + "x" + std::to_string(pred.h) + "x" +
                         std::to_string(pred.w) + " does not match ground truth " + std::to_string(truth.n) + "x" +
                         std::to_string(truth.h) + "x" + std::to_string(truth.w));
  }
  if (mask && mask->size() != truth.size()) throw DimensionError("ignore mask does not match the ground truth extent");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth.values[i];
    if (t == kIgnoreLabel || (mask && (*mask)[i])) continue;
    const int p = pred.values[i];
    if (t >= classes || p >= classes) {
      throw ValidationError("class " + std::to_string(t >= classes ? t : p) + " in " +
                            (t >= classes ? "ground truth" : "prediction") + " at pixel " + std::to_string(i) +
                            " is outside " + std::to_string(classes) + " classes");
    }
    cm.add(t, p);
  }
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw DegenerateInputError("overall accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

ClassScores class_prf(const ConfusionMatrix& cm, int cls) {
  if (cls < 0 || cls >= cm.classes()) throw ContractError("class " + std::to_string(cls) + " out of range");
  const double tp = static_cast<double>(cm.at(cls, cls));
  const double predicted = static_cast<double>(cm.col_sum(cls));
  const double actual = static_cast<double>(cm.row_sum(cls));
  ClassScores s;
  auto ratio = [&](double num, double den) {
    if (den == 0.0) {
      s.undefined = true;
      return 0.0;
    }
    return num / den;
  };
  s.precision = ratio(tp, predicted);
  s.recall = ratio(tp, actual);
  s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

double mean_f1(std::span<const double> f1_scores) {
  if (f1_scores.empty()) throw ContractError("mean F1 over an empty class set");
  // Neumaier compensated sum.
  double sum = 0.0, carry = 0.0;
  for (double v : f1_scores) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + carry) / static_cast<double>(f1_scores.size());
}

double mean_f1(const ConfusionMatrix& cm, const std::vector<int>& classes) {
  if (classes.empty()) throw ContractError("mean F1 over an empty class set");
  std::vector<double> f1;
  for (int c : classes) {
    if (c < 0 || c >= cm.classes()) {
      throw ContractError("mean F1 class " + std::to_string(c) + " outside " + std::to_string(cm.classes()) +
                          " classes");
    }
    f1.push_back(class_prf(cm, c).f1);
  }
  return mean_f1(f1);
}

IgnoreMask boundary_ignore_mask(const LabelMap& truth, int radius) {
  if (radius < 0) throw ValidationError("boundary radius must be >= 0");
  IgnoreMask mask(truth.size(), 0);
  if (radius == 0) return mask;
  const auto h = truth.h, w = truth.w, r = static_cast<std::int64_t>(radius);
  // Separable sliding min / max over the (2r+1)^2 window; ignore pixels are
  // neutral (255 for min, -1 for max).
  std::vector<int> row_lo(static_cast<std::size_t>(h * w)), row_hi(row_lo.size());
  for (std::int64_t b = 0; b < truth.n; ++b) {
    const auto* v = truth.values.data() + b * h * w;
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        int mn = 255, mx = -1;
        for (auto xx = std::max<std::int64_t>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          const int c = v[y * w + xx];
          mn = std::min(mn, c);
          if (c != kIgnoreLabel) mx = std::max(mx, c);
        }
        row_lo[static_cast<std::size_t>(y * w + x)] = mn;
        row_hi[static_cast<std::size_t>(y * w + x)] = mx;
      }
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        int mn = 255, mx = -1;
        for (auto yy = std::max<std::int64_t>(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
          mn = std::min(mn, row_lo[static_cast<std::size_t>(yy * w + x)]);
          mx = std::max(mx, row_hi[static_cast<std::size_t>(yy * w + x)]);
        }
        const int c = v[y * w + x];
        if (c != kIgnoreLabel && (mn < c || mx > c)) mask[static_cast<std::size_t>(b * h * w + y * w + x)] = 1;
      }
  }
  return mask;
}

LabelMap apply_ignore_mask(const LabelMap& truth, const IgnoreMask& mask) {
  if (mask.size() != truth.size()) throw DimensionError("ignore mask does not match the ground truth extent");
  LabelMap out = truth;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.values[i] = kIgnoreLabel;
  return out;
}

}  // namespace afnet::eval
