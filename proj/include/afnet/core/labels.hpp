#pragma once

#include <cstdint>
#include <vector>

namespace afnet {

/// Pixels carrying this value are excluded from losses and metrics.
inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Class indices for a batch of N maps, each H x W, row-major.
struct LabelMap {
  std::int64_t n = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::vector<std::uint8_t> values;

  LabelMap() = default;
  LabelMap(std::int64_t n_, std::int64_t h_, std::int64_t w_, std::uint8_t fill = 0)
      : n(n_), h(h_), w(w_), values(static_cast<std::size_t>(n_ * h_ * w_), fill) {}

  std::size_t size() const { return values.size(); }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

}  // namespace afnet
