#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afnet/core/labels.hpp"

namespace afnet::eval {

/// K x K pixel counts; rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes);

  int classes() const { return k_; }
  std::uint64_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }
  void add(int truth, int pred, std::uint64_t count = 1) { counts_[index(truth, pred)] += count; }

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(int truth) const;
  std::uint64_t col_sum(int pred) const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// Elementwise sum; class counts must agree (DimensionError).
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int truth, int pred) const;

  int k_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Per-pixel flags, nonzero = excluded from evaluation.
using IgnoreMask = std::vector<std::uint8_t>;

/// Counts every pixel that is neither masked nor labeled kIgnoreLabel in
/// the ground truth. Extents must match (DimensionError); a counted class
/// >= K in either map is a ValidationError.
ConfusionMatrix confusion_matrix(const LabelMap& pred, const LabelMap& truth, int classes,
                                 const IgnoreMask* mask = nullptr);

/// trace / total. An empty matrix is a DegenerateInputError.
double overall_accuracy(const ConfusionMatrix& cm);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool undefined = false;  // some ratio was 0/0 and reported as 0
};

ClassScores class_prf(const ConfusionMatrix& cm, int cls);

/// The five classes the benchmark tables average (clutter excluded).
inline const std::vector<int> kTableClasses{0, 1, 2, 3, 4};

/// Mean F1 over `classes` (ContractError when empty or out of range).
double mean_f1(const ConfusionMatrix& cm, const std::vector<int>& classes = kTableClasses);
/// Mean of already-computed F1 scores.
double mean_f1(std::span<const double> f1_scores);

/// Ground-truth pixels within Chebyshev distance `radius` of a pixel of a
/// different class (ignore-labeled pixels never count as a class). Radius 0
/// marks nothing.
IgnoreMask boundary_ignore_mask(const LabelMap& truth, int radius);

/// Copy of `truth` with masked pixels set to kIgnoreLabel.
LabelMap apply_ignore_mask(const LabelMap& truth, const IgnoreMask& mask);

}  // namespace afnet::eval
