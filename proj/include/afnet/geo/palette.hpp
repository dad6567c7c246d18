#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afnet/geo/raster.hpp"

namespace afnet::geo {

using Rgb = std::array<std::uint8_t, 3>;

/// Class index <-> RGB color. Class i is `colors[i]`; the ignore label maps
/// to `ignore_color`.
struct Palette {
  std::vector<std::string> names;
  std::vector<Rgb> colors;
  Rgb ignore_color{0, 0, 0};

  /// imp_surf white, building blue, low_veg cyan, tree green, car yellow,
  /// clutter red.
  static Palette standard();

  std::size_t size() const { return colors.size(); }
  std::optional<std::uint8_t> lookup(const Rgb& c) const;
  /// Throws ValidationError on duplicate colors or names, a class color equal
  /// to the ignore color, or more than 254 classes.
  void check() const;
};

/// `name:r,g,b;name:r,g,b;...`
Palette parse_palette(const std::string& spec);
std::string format_palette(const Palette& p);

/// Single-channel class raster -> three-channel color raster.
RasterImage encode_labels(const RasterImage& classes, const Palette& palette = Palette::standard());
/// Inverse of encode_labels. Every pixel color must be in the palette;
/// otherwise ValidationError naming the first offending color and location.
RasterImage decode_labels(const RasterImage& colors, const Palette& palette = Palette::standard());

}  // namespace afnet::geo
