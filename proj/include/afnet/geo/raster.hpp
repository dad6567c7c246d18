#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "afnet/core/labels.hpp"

namespace afnet::geo {

enum class PixelType { kU8, kF32 };
enum class RasterRole { kOptical, kDsm, kNdvi, kLabel, kProbability, kOther };

std::string to_string(PixelType t);
std::string to_string(RasterRole r);

/// Planar raster (channel, row, column; column fastest). Exactly one of
/// `u8` / `f32` holds data, selected by `type`.
struct RasterImage {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::int64_t channels = 0;
  PixelType type = PixelType::kF32;
  RasterRole role = RasterRole::kOther;
  std::vector<std::uint8_t> u8;
  std::vector<float> f32;

  static RasterImage make_u8(std::int64_t width, std::int64_t height, std::int64_t channels,
                             RasterRole role = RasterRole::kOther, std::uint8_t fill = 0);
  static RasterImage make_f32(std::int64_t width, std::int64_t height, std::int64_t channels,
                              RasterRole role = RasterRole::kOther, float fill = 0.0f);

  std::int64_t plane_size() const { return width * height; }
  std::int64_t element_count() const { return plane_size() * channels; }
  std::size_t index(std::int64_t c, std::int64_t y, std::int64_t x) const {
    return static_cast<std::size_t>((c * height + y) * width + x);
  }
  /// Value at (c, y, x) widened to float regardless of storage.
  float value(std::int64_t c, std::int64_t y, std::int64_t x) const;
  /// All values widened to float, planar.
  std::vector<float> as_float() const;

  /// Buffer sizes match the extents; label rasters are one u8 channel.
  /// Throws DimensionError.
  void check() const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Single-channel u8 raster viewed as a one-image label map.
LabelMap to_label_map(const RasterImage& img);
RasterImage from_label_map(const LabelMap& labels, std::int64_t index = 0);

/// Format is chosen by content: one u8 channel -> PGM (P5), three u8
/// channels -> PPM (P6), f32 -> AFT1 record of shape [C, H, W].
void write_raster(std::ostream& os, const RasterImage& img);
void write_raster(const std::filesystem::path& path, const RasterImage& img);

/// Dispatches on the leading magic. PNM headers may carry `#` comments;
/// maxval must be 255 (FormatError otherwise). Malformed input raises
/// ParseError with the byte offset. AFT1 records may be rank 2 (one
/// channel) or rank 3.
RasterImage read_raster(std::istream& is, RasterRole role = RasterRole::kOther);
RasterImage read_raster(const std::filesystem::path& path, RasterRole role = RasterRole::kOther);

}  // namespace afnet::geo
