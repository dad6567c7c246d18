#include "afnet/core/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace afnet {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'F', 'T', '1'};
constexpr std::uint32_t kMaxRank = 8;

std::uint64_t offset_of(std::istream& is, std::uint64_t base) {
  is.clear();
  const auto pos = is.tellg();
  return base + (pos < 0 ? 0 : static_cast<std::uint64_t>(pos));
}

}  // namespace

namespace binary {

void write_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& os, float v) { write_u32(os, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t read_u32(std::istream& is, const char* what, std::uint64_t base_offset) {
  const auto start = is.tellg();
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw ParseError(std::string("truncated ") + what + " at byte offset " +
                     std::to_string(base_offset + (start < 0 ? 0 : static_cast<std::uint64_t>(start))));
  }
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace binary

void write_raw_tensor(std::ostream& os, const Shape& shape, std::span<const float> values) {
  os.write(kMagic.data(), kMagic.size());
  binary::write_u32(os, static_cast<std::uint32_t>(shape.size()));
  for (auto e : shape) binary::write_u32(os, static_cast<std::uint32_t>(e));
  std::vector<unsigned char> payload(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(values[i]);
    for (int k = 0; k < 4; ++k) payload[i * 4 + k] = static_cast<unsigned char>(u >> (8 * k));
  }
  os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!os) throw IoError("failed writing tensor record");
}

RawTensor read_raw_tensor(std::istream& is, std::uint64_t base_offset) {
  std::array<char, 4> magic{};
  const auto magic_at = offset_of(is, base_offset);
  if (!is.read(magic.data(), 4)) throw ParseError("truncated tensor magic at byte offset " + std::to_string(magic_at));
  if (magic != kMagic) throw ParseError("bad tensor magic at byte offset " + std::to_string(magic_at));
  const std::uint32_t rank = binary::read_u32(is, "tensor rank", base_offset);
  if (rank > kMaxRank) {
    throw ParseError("tensor rank " + std::to_string(rank) + " too large at byte offset " +
                     std::to_string(magic_at + 4));
  }
  RawTensor out;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto e = binary::read_u32(is, "tensor extent", base_offset);
    out.shape.push_back(e);
    count *= e;
    if (count > (std::uint64_t{1} << 34)) throw ParseError("tensor extents overflow at byte offset " + std::to_string(magic_at));
  }
  const auto payload_at = offset_of(is, base_offset);
  if (const auto here = is.tellg(); here >= 0 && is.seekg(0, std::ios::end)) {
    const auto available = static_cast<std::uint64_t>(is.tellg() - here);
    is.seekg(here);
    if (available < count * 4) {
      throw ParseError("truncated tensor payload at byte offset " + std::to_string(payload_at) + " (expected " +
                       std::to_string(count * 4) + " bytes, found " + std::to_string(available) + ")");
    }
  }
  is.clear();
  std::vector<unsigned char> payload(count * 4);
  if (!is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()))) {
    throw ParseError("truncated tensor payload at byte offset " + std::to_string(payload_at) + " (expected " +
                     std::to_string(payload.size()) + " bytes)");
  }
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t u = 0;
    for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(payload[i * 4 + k]) << (8 * k);
    out.values[i] = std::bit_cast<float>(u);
  }
  return out;
}

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t) {
  if constexpr (std::is_same_v<T, float>) {
    write_raw_tensor(os, t.shape(), t.data());
  } else {
    std::vector<float> v(t.data().begin(), t.data().end());
    write_raw_tensor(os, t.shape(), v);
  }
}

template <typename T>
Tensor<T> read_tensor(std::istream& is) {
  RawTensor raw = read_raw_tensor(is);
  if constexpr (std::is_same_v<T, float>) {
    return Tensor<T>::from_data(std::move(raw.shape), std::move(raw.values));
  } else {
    return Tensor<T>::from_data(std::move(raw.shape), std::vector<T>(raw.values.begin(), raw.values.end()));
  }
}

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

template <typename T>
Tensor<T> load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_tensor<T>(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

template void write_tensor(std::ostream&, const Tensor<float>&);
template void write_tensor(std::ostream&, const Tensor<double>&);
template Tensor<float> read_tensor(std::istream&);
template Tensor<double> read_tensor(std::istream&);
template void save_tensor(const std::filesystem::path&, const Tensor<float>&);
template void save_tensor(const std::filesystem::path&, const Tensor<double>&);
template Tensor<float> load_tensor(const std::filesystem::path&);
template Tensor<double> load_tensor(const std::filesystem::path&);

}  // namespace afnet
