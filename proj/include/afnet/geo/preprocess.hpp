#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "afnet/geo/raster.hpp"

namespace afnet::geo {

/// Per-channel mean and standard deviation over a training set.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t channels() const { return mean.size(); }
  /// Throws DegenerateInputError on a non-positive or non-finite std and
  /// DimensionError when the two vectors disagree.
  void check() const;
  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

/// Population statistics accumulated over every pixel of every raster.
ChannelStats compute_stats(const std::vector<const RasterImage*>& rasters);

/// (x - mean) / std per channel, as f32.
RasterImage normalize(const RasterImage& img, const ChannelStats& stats);

/// (nir - red) / (nir + red), 0 where the denominator is 0.
std::vector<float> compute_ndvi(std::span<const float> nir, std::span<const float> red);
/// NDVI raster from two channels of an optical raster (IRRG: IR 0, R 1).
RasterImage compute_ndvi(const RasterImage& optical, std::int64_t nir_channel = 0, std::int64_t red_channel = 1);

/// Reflects `margin` pixels on every side about the border pixel (no edge
/// repeat): a row [a, b, c] with margin 1 becomes [b, a, b, c, b].
template <typename T>
std::vector<T> mirror_pad(const std::vector<T>& planes, std::int64_t channels, std::int64_t h, std::int64_t w,
                          std::int64_t margin);
RasterImage mirror_pad(const RasterImage& img, std::int64_t margin);

/// Stats file: a `channel,mean,std` header, then one row per channel.
void write_stats(const std::filesystem::path& path, const ChannelStats& stats);
ChannelStats read_stats(const std::filesystem::path& path);

}  // namespace afnet::geo
