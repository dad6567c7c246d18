#include "afnet/geo/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "afnet/core/errors.hpp"
#include "afnet/geo/preprocess.hpp"

namespace afnet::geo {

namespace {

struct AxisLayout {
  std::vector<std::int64_t> origins;
  std::vector<std::int64_t> begin;  // valid band, padded coordinates
  std::vector<std::int64_t> end;
};

AxisLayout layout_axis(std::int64_t n, std::int64_t tile, std::int64_t margin, std::int64_t stride,
                       const char* axis) {
  const auto padded = n + 2 * margin;
  if (tile > padded) {
    throw GeometryError(std::string("tile ") + std::to_string(tile) + " exceeds padded " + axis + " extent " +
                        std::to_string(padded));
  }
  AxisLayout out;
  for (std::int64_t o = 0;; o += stride) {
    out.origins.push_back(std::min(o, padded - tile));
    if (out.origins.back() == padded - tile) break;
  }
  const auto count = out.origins.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto b = i == 0 ? margin : out.end.back();
    const auto e = i + 1 == count ? margin + n : std::min(out.origins[i] + margin + stride, margin + n);
    out.begin.push_back(b);
    out.end.push_back(e);
  }
  return out;
}

}  // namespace

TileGrid make_tile_grid(std::int64_t width, std::int64_t height, std::int64_t tile, std::int64_t overlap) {
  if (tile < 2 || tile % 2 != 0) throw ContractError("tile size must be even and >= 2, got " + std::to_string(tile));
  if (overlap != tile / 2) {
    throw ContractError("only half overlap is supported: tile " + std::to_string(tile) + " needs overlap " +
                        std::to_string(tile / 2) + ", got " + std::to_string(overlap));
  }
  if (width < 1 || height < 1) throw GeometryError("raster extent must be positive");
  TileGrid g;
  g.width = width;
  g.height = height;
  g.tile = tile;
  g.margin = tile / 4;
  g.stride = tile - overlap;
  if (g.margin >= width || g.margin >= height) {
    throw GeometryError("mirror margin " + std::to_string(g.margin) + " needs an extent above it, raster is " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  const auto rows = layout_axis(height, tile, g.margin, g.stride, "row");
  const auto cols = layout_axis(width, tile, g.margin, g.stride, "column");
  g.row_origins = rows.origins;
  g.col_origins = cols.origins;
  for (std::size_t r = 0; r < rows.origins.size(); ++r)
    for (std::size_t c = 0; c < cols.origins.size(); ++c)
      g.tiles.push_back({rows.origins[r], cols.origins[c],
                         Rect{rows.begin[r], cols.begin[c], rows.end[r] - rows.begin[r], cols.end[c] - cols.begin[c]}});
  return g;
}

template <typename T>
std::vector<std::vector<T>> slice_tiles(const std::vector<T>& planes, std::int64_t channels, const TileGrid& grid) {
  const auto padded = mirror_pad(planes, channels, grid.height, grid.width, grid.margin);
  const auto ph = grid.padded_height(), pw = grid.padded_width(), t = grid.tile;
  std::vector<std::vector<T>> out;
  out.reserve(grid.tiles.size());
  for (const auto& tile : grid.tiles) {
    std::vector<T> buf(static_cast<std::size_t>(channels * t * t));
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t y = 0; y < t; ++y) {
        const auto src = padded.begin() + ((c * ph + tile.top + y) * pw + tile.left);
        std::copy(src, src + t, buf.begin() + (c * t + y) * t);
      }
    out.push_back(std::move(buf));
  }
  return out;
}

std::string to_string(StitchMode m) { return m == StitchMode::kCrop ? "crop" : "average"; }

StitchMode parse_stitch_mode(const std::string& s) {
  if (s == "crop") return StitchMode::kCrop;
  if (s == "average") return StitchMode::kAverage;
  throw ValidationError("unknown stitch mode '" + s + "' (expected crop or average)");
}

template <typename T>
std::vector<T> stitch_tiles(const std::vector<std::vector<T>>& tiles, std::int64_t channels, const TileGrid& grid,
                            StitchMode mode) {
  if (tiles.size() != grid.tiles.size()) {
    throw ContractError("stitch: got " + std::to_string(tiles.size()) + " tiles, grid has " +
                        std::to_string(grid.tiles.size()));
  }
  const auto t = grid.tile, h = grid.height, w = grid.width, m = grid.margin;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (static_cast<std::int64_t>(tiles[i].size()) != channels * t * t) {
      throw ContractError("stitch: tile " + std::to_string(i) + " has " + std::to_string(tiles[i].size()) +
                          " values, expected " + std::to_string(channels * t * t));
    }
  }
  std::vector<T> out(static_cast<std::size_t>(channels * h * w));
  if (mode == StitchMode::kCrop) {
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      const auto& tile = grid.tiles[i];
      const auto& v = tile.valid;
      for (std::int64_t c = 0; c < channels; ++c)
        for (std::int64_t y = v.top; y < v.top + v.height; ++y) {
          const auto src = tiles[i].begin() + ((c * t + y - tile.top) * t + v.left - tile.left);
          std::copy(src, src + v.width, out.begin() + ((c * h + y - m) * w + v.left - m));
        }
    }
    return out;
  }
  std::vector<double> sum(out.size(), 0.0);
  std::vector<int> count(static_cast<std::size_t>(h * w), 0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto& tile = grid.tiles[i];
    const auto y0 = std::max(tile.top, m), y1 = std::min(tile.top + t, m + h);
    const auto x0 = std::max(tile.left, m), x1 = std::min(tile.left + t, m + w);
    for (std::int64_t y = y0; y < y1; ++y)
      for (std::int64_t x = x0; x < x1; ++x) {
        ++count[static_cast<std::size_t>((y - m) * w + x - m)];
        for (std::int64_t c = 0; c < channels; ++c)
          sum[static_cast<std::size_t>((c * h + y - m) * w + x - m)] +=
              static_cast<double>(tiles[i][static_cast<std::size_t>((c * t + y - tile.top) * t + x - tile.left)]);
      }
  }
  for (std::int64_t c = 0; c < channels; ++c)
    for (std::int64_t p = 0; p < h * w; ++p) {
      const double mean = sum[static_cast<std::size_t>(c * h * w + p)] / count[static_cast<std::size_t>(p)];
      out[static_cast<std::size_t>(c * h * w + p)] =
          std::is_integral_v<T> ? static_cast<T>(std::lround(mean)) : static_cast<T>(mean);
    }
  return out;
}

#define AFNET_INSTANTIATE(T)                                                                                   \
  template std::vector<std::vector<T>> slice_tiles(const std::vector<T>&, std::int64_t, const TileGrid&);     \
  template std::vector<T> stitch_tiles(const std::vector<std::vector<T>>&, std::int64_t, const TileGrid&,      \
                                       StitchMode);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)
AFNET_INSTANTIATE(std::uint8_t)

#undef AFNET_INSTANTIATE

}  // namespace afnet::geo
