#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "afnet/core/tensor_io.hpp"
#include "afnet/nn/param_store.hpp"

namespace afnet::nn {

struct CheckpointRecord {
  std::string name;
  RawTensor tensor;
};

/// "AFCK" then a sequence of (u32 name length, UTF-8 name, AFT1 tensor)
/// records until end of file.
void write_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointRecord>& records);
std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path);

const CheckpointRecord* find_record(const std::vector<CheckpointRecord>& records, const std::string& name);

template <typename T>
std::vector<CheckpointRecord> params_to_records(const ParamStore<T>& store);

/// Loads every store entry from `records` (extra records are ignored).
/// A missing entry or a shape mismatch is a ContractError naming it.
template <typename T>
void load_params(const ParamStore<T>& store, const std::vector<CheckpointRecord>& records);

}  // namespace afnet::nn
