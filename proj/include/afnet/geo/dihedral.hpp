#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace afnet::geo {

/// Element of the symmetry group of the square: an optional horizontal
/// flip followed by `quarter_turns` counter-clockwise 90 degree rotations.
struct Dihedral {
  bool flip = false;
  int quarter_turns = 0;  // 0..3

  Dihedral inverse() const;
  bool is_identity() const { return !flip && quarter_turns == 0; }
  std::string name() const;
  friend bool operator==(const Dihedral&, const Dihedral&) = default;
};

const std::array<Dihedral, 8>& dihedral_group();

/// Applies `d` to each of `planes` row-major h x w planes. Odd quarter
/// turns swap the output extents.
template <typename T>
std::vector<T> apply_dihedral(const std::vector<T>& src, std::int64_t planes, std::int64_t h, std::int64_t w,
                              Dihedral d, std::int64_t* out_h = nullptr, std::int64_t* out_w = nullptr);

/// Horizontal (mirror columns) and vertical (mirror rows) flips.
template <typename T>
std::vector<T> flip_planes(const std::vector<T>& src, std::int64_t planes, std::int64_t h, std::int64_t w,
                           bool horizontal);

}  // namespace afnet::geo
