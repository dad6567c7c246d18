#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "afnet/core/tensor.hpp"

namespace afnet {

/// Raw tensor record: "AFT1", u32 rank, rank x u32 extents, then the
/// float32 payload, all little-endian, row-major.
struct RawTensor {
  Shape shape;
  std::vector<float> values;
};

void write_raw_tensor(std::ostream& os, const Shape& shape, std::span<const float> values);
/// Reads one record. `base_offset` is added to byte offsets in error messages
/// when the record is embedded in a larger file.
RawTensor read_raw_tensor(std::istream& is, std::uint64_t base_offset = 0);

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t);
template <typename T>
Tensor<T> read_tensor(std::istream& is);

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t);
template <typename T>
Tensor<T> load_tensor(const std::filesystem::path& path);

namespace binary {

void write_u32(std::ostream& os, std::uint32_t v);
void write_f32(std::ostream& os, float v);
/// Throws ParseError naming `what` and the byte offset on short reads.
std::uint32_t read_u32(std::istream& is, const char* what, std::uint64_t base_offset);

}  // namespace binary

}  // namespace afnet
