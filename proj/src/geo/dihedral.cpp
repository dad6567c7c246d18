#include "afnet/geo/dihedral.hpp"

#include <utility>

#include "afnet/core/errors.hpp"

namespace afnet::geo {

Dihedral Dihedral::inverse() const {
  if (flip) return *this;  // reflections are involutions
  return {false, (4 - quarter_turns) % 4};
}

std::string Dihedral::name() const {
  std::string s = flip ? "flip+rot" : "rot";
  return s + std::to_string(90 * quarter_turns);
}

const std::array<Dihedral, 8>& dihedral_group() {
  static const std::array<Dihedral, 8> g{Dihedral{false, 0}, Dihedral{false, 1}, Dihedral{false, 2},
                                         Dihedral{false, 3}, Dihedral{true, 0},  Dihedral{true, 1},
                                         Dihedral{true, 2},  Dihedral{true, 3}};
  return g;
}

template <typename T>
std::vector<T> flip_planes(const std::vector<T>& src, std::int64_t planes, std::int64_t h, std::int64_t w,
                           bool horizontal) {
  std::vector<T> out(src.size());
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* in = src.data() + p * h * w;
    T* o = out.data() + p * h * w;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        o[y * w + x] = horizontal ? in[y * w + (w - 1 - x)] : in[(h - 1 - y) * w + x];
      }
    }
  }
  return out;
}

template <typename T>
std::vector<T> apply_dihedral(const std::vector<T>& src, std::int64_t planes, std::int64_t h, std::int64_t w,
                              Dihedral d, std::int64_t* out_h, std::int64_t* out_w) {
  if (static_cast<std::int64_t>(src.size()) != planes * h * w) {
    throw DimensionError("apply_dihedral: buffer size does not match planes x h x w");
  }
  if (d.quarter_turns < 0 || d.quarter_turns > 3) throw ContractError("quarter_turns must be in 0..3");
  std::vector<T> cur = d.flip ? flip_planes(src, planes, h, w, true) : src;
  for (int t = 0; t < d.quarter_turns; ++t) {
    // Counter-clockwise: out[i][j] = in[j][w - 1 - i], out is w x h.
    std::vector<T> next(cur.size());
    for (std::int64_t p = 0; p < planes; ++p) {
      const T* in = cur.data() + p * h * w;
      T* o = next.data() + p * h * w;
      for (std::int64_t i = 0; i < w; ++i) {
        for (std::int64_t j = 0; j < h; ++j) o[i * h + j] = in[j * w + (w - 1 - i)];
      }
    }
    cur = std::move(next);
    std::swap(h, w);
  }
  if (out_h) *out_h = h;
  if (out_w) *out_w = w;
  return cur;
}

template std::vector<float> apply_dihedral(const std::vector<float>&, std::int64_t, std::int64_t, std::int64_t,
                                           Dihedral, std::int64_t*, std::int64_t*);
template std::vector<double> apply_dihedral(const std::vector<double>&, std::int64_t, std::int64_t, std::int64_t,
                                            Dihedral, std::int64_t*, std::int64_t*);
template std::vector<std::uint8_t> apply_dihedral(const std::vector<std::uint8_t>&, std::int64_t, std::int64_t,
                                                  std::int64_t, Dihedral, std::int64_t*, std::int64_t*);
template std::vector<float> flip_planes(const std::vector<float>&, std::int64_t, std::int64_t, std::int64_t, bool);
template std::vector<double> flip_planes(const std::vector<double>&, std::int64_t, std::int64_t, std::int64_t, bool);
template std::vector<std::uint8_t> flip_planes(const std::vector<std::uint8_t>&, std::int64_t, std::int64_t,
                                               std::int64_t, bool);

}  // namespace afnet::geo
