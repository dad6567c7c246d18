#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace afnet::geo {

/// Axis-aligned pixel rectangle [top, top + height) x [left, left + width).
struct Rect {
  std::int64_t top = 0;
  std::int64_t left = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// One slice of the padded raster. Both the origin and the valid crop are
/// in padded coordinates.
struct Tile {
  std::int64_t top = 0;
  std::int64_t left = 0;
  Rect valid;
  friend bool operator==(const Tile&, const Tile&) = default;
};

struct TileGrid {
  std::int64_t width = 0;  // original extent
  std::int64_t height = 0;
  std::int64_t tile = 0;
  std::int64_t margin = 0;  // mirror padding per side
  std::int64_t stride = 0;
  std::vector<std::int64_t> row_origins;
  std::vector<std::int64_t> col_origins;
  std::vector<Tile> tiles;  // row-major over (row_origins, col_origins)

  std::int64_t padded_width() const { return width + 2 * margin; }
  std::int64_t padded_height() const { return height + 2 * margin; }
  std::size_t rows() const { return row_origins.size(); }
  std::size_t cols() const { return col_origins.size(); }
};

/// Half-overlap grid: margin tile/4, stride tile/2, origins at multiples of
/// the stride with the last one clamped to the padded edge. Valid crops are
/// the central stride-wide band of each tile, with the outermost tiles
/// stretched so the crops partition the original extent exactly.
/// Requires an even tile and overlap == tile / 2 (ContractError) and a tile
/// no larger than the padded extent (GeometryError).
TileGrid make_tile_grid(std::int64_t width, std::int64_t height, std::int64_t tile, std::int64_t overlap);

/// Mirror-pads planar data by the grid margin and cuts every tile
/// (channels x tile x tile each), in grid order.
template <typename T>
std::vector<std::vector<T>> slice_tiles(const std::vector<T>& planes, std::int64_t channels, const TileGrid& grid);

enum class StitchMode {
  kCrop,     // each pixel from the one tile whose valid crop holds it
  kAverage,  // mean over every tile covering the pixel
};

std::string to_string(StitchMode m);
StitchMode parse_stitch_mode(const std::string& s);

/// Reassembles planar channels x height x width output from per-tile data.
/// Crop mode reproduces sliced input bit-exactly.
template <typename T>
std::vector<T> stitch_tiles(const std::vector<std::vector<T>>& tiles, std::int64_t channels, const TileGrid& grid,
                            StitchMode mode = StitchMode::kCrop);

}  // namespace afnet::geo
