#include "afnet/nn/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace afnet::nn {

namespace {
constexpr std::array<char, 4> kMagic{'A', 'F', 'C', 'K'};
constexpr std::uint32_t kMaxNameLength = 4096;
}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  for (const auto& r : records) {
    binary::write_u32(os, static_cast<std::uint32_t>(r.name.size()));
    os.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    write_raw_tensor(os, r.tensor.shape, r.tensor.values);
  }
  if (!os) throw IoError("failed writing checkpoint " + path.string());
}

std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kMagic) {
    throw ParseError(path.string() + ": missing AFCK magic at byte offset 0");
  }
  std::vector<CheckpointRecord> records;
  try {
    while (is.peek() != std::char_traits<char>::eof()) {
      const auto at = static_cast<std::uint64_t>(is.tellg());
      const std::uint32_t len = binary::read_u32(is, "record name length", 0);
      if (len > kMaxNameLength) {
        throw ParseError("record name length " + std::to_string(len) + " too large at byte offset " +
                         std::to_string(at));
      }
      CheckpointRecord rec;
      rec.name.resize(len);
      if (!is.read(rec.name.data(), len)) {
        throw ParseError("truncated record name at byte offset " + std::to_string(at + 4));
      }
      rec.tensor = read_raw_tensor(is);
      records.push_back(std::move(rec));
    }
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return records;
}

const CheckpointRecord* find_record(const std::vector<CheckpointRecord>& records, const std::string& name) {
  auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.name == name; });
  return it == records.end() ? nullptr : &*it;
}

template <typename T>
std::vector<CheckpointRecord> params_to_records(const ParamStore<T>& store) {
  std::vector<CheckpointRecord> out;
  out.reserve(store.size());
  for (const auto& e : store.entries()) {
    out.push_back({e.name, {e.tensor.shape(), std::vector<float>(e.tensor.data().begin(), e.tensor.data().end())}});
  }
  return out;
}

template <typename T>
void load_params(const ParamStore<T>& store, const std::vector<CheckpointRecord>& records) {
  for (const auto& e : store.entries()) {
    const CheckpointRecord* r = find_record(records, e.name);
    if (!r) throw ContractError("checkpoint has no record for parameter '" + e.name + "'");
    if (r->tensor.shape != e.tensor.shape()) {
      throw ContractError("checkpoint record '" + e.name + "' has shape " + shape_to_string(r->tensor.shape) +
                          ", model expects " + shape_to_string(e.tensor.shape()));
    }
    std::transform(r->tensor.values.begin(), r->tensor.values.end(), e.tensor.mutable_data().begin(),
                   [](float v) { return static_cast<T>(v); });
  }
}

template std::vector<CheckpointRecord> params_to_records(const ParamStore<float>&);
template std::vector<CheckpointRecord> params_to_records(const ParamStore<double>&);
template void load_params(const ParamStore<float>&, const std::vector<CheckpointRecord>&);
template void load_params(const ParamStore<double>&, const std::vector<CheckpointRecord>&);

}  // namespace afnet::nn
