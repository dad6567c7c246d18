#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "afnet/core/tensor.hpp"

namespace afnet::nn {

enum class ParamKind {
  kConvWeight,
  kBias,
  kNormScale,
  kNormShift,
  kRunningMean,
  kRunningVar,
};

/// Learnable tensors are updated by the optimizer; running statistics are
/// buffers that only BN touches.
bool is_trainable(ParamKind kind);
/// Weight decay applies to convolution weights only.
bool takes_weight_decay(ParamKind kind);

template <typename T>
struct ParamEntry {
  std::string name;
  Tensor<T> tensor;
  ParamKind kind;
};

/// Named, insertion-ordered registry of every tensor a model owns.
template <typename T>
class ParamStore {
 public:
  /// Registers a tensor; duplicate names are a ContractError.
  Tensor<T> add(const std::string& name, Tensor<T> tensor, ParamKind kind);

  const std::vector<ParamEntry<T>>& entries() const { return entries_; }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const ParamEntry<T>& get(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }

  /// Number of scalar learnable values.
  std::int64_t parameter_count() const;
  void zero_grad() const;

  /// Copies values for every name present in both stores with equal shape;
  /// returns how many entries were copied.
  std::size_t copy_matching_from(const ParamStore& other) const;
  /// Element-wise identical values and identical names/order.
  bool equals(const ParamStore& other) const;

 private:
  std::vector<ParamEntry<T>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Scoped helper for building a model: prefixes names and owns the init RNG.
template <typename T>
class ParamBuilder {
 public:
  ParamBuilder(ParamStore<T>& store, std::mt19937_64& rng, std::string prefix = {})
      : store_(store), rng_(rng), prefix_(std::move(prefix)) {}

  ParamBuilder scope(const std::string& name) const;
  std::string qualified(const std::string& name) const;

  /// Uniform(-b, b) with b = sqrt(6 / fan_in).
  Tensor<T> fan_in_uniform(const std::string& name, Shape shape, std::int64_t fan_in, ParamKind kind);
  Tensor<T> constant(const std::string& name, Shape shape, T value, ParamKind kind);

  ParamStore<T>& store() const { return store_; }

 private:
  ParamStore<T>& store_;
  std::mt19937_64& rng_;
  std::string prefix_;
};

}  // namespace afnet::nn
