#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "afnet/core/labels.hpp"
#include "afnet/core/tensor.hpp"

namespace afnet::train {

/// One co-registered training slice: planar optical and auxiliary channels
/// plus a class map, all h x w.
struct Sample {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t image_channels = 0;
  std::int64_t aux_channels = 0;
  std::vector<float> image;  // image_channels x h x w
  std::vector<float> aux;    // aux_channels x h x w (may be empty)
  std::vector<std::uint8_t> label;  // h x w

  /// Throws DimensionError when buffer sizes disagree with the extents.
  void check() const;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct AugmentConfig {
  bool hflip = false;
  bool vflip = false;
  bool rotate90 = false;
  int crop = 0;  // 0 keeps the full slice
};

/// Applies the same random geometric transform to image, aux and label:
/// each enabled flip with probability 1/2, a uniform multiple of 90 degrees
/// when rotation is on (square slices only), then a crop whose offsets are
/// uniform over [0, extent - crop] inclusive.
Sample augment(const Sample& sample, std::mt19937_64& rng, const AugmentConfig& cfg);

Sample hflip(const Sample& s);
Sample vflip(const Sample& s);
Sample rotate90(const Sample& s, int quarter_turns);
Sample crop(const Sample& s, std::int64_t top, std::int64_t left, std::int64_t size);

template <typename T>
struct Batch {
  Tensor<T> image;  // [N, C, H, W]
  Tensor<T> aux;    // [N, C_aux, H, W], undefined without aux channels
  LabelMap labels;
};

/// Stacks samples of identical geometry into tensors.
template <typename T>
Batch<T> make_batch(const std::vector<const Sample*>& samples);

}  // namespace afnet::train
