#include "afnet/nn/param_store.hpp"

#include <algorithm>
#include <cmath>

namespace afnet::nn {

bool is_trainable(ParamKind kind) {
  return kind != ParamKind::kRunningMean && kind != ParamKind::kRunningVar;
}

bool takes_weight_decay(ParamKind kind) { return kind == ParamKind::kConvWeight; }

template <typename T>
Tensor<T> ParamStore<T>::add(const std::string& name, Tensor<T> tensor, ParamKind kind) {
  if (index_.count(name)) throw ContractError("parameter '" + name + "' registered twice");
  tensor.set_requires_grad(is_trainable(kind));
  index_.emplace(name, entries_.size());
  entries_.push_back({name, tensor, kind});
  return tensor;
}

template <typename T>
const ParamEntry<T>& ParamStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter named '" + name + "'");
  return entries_[it->second];
}

template <typename T>
std::int64_t ParamStore<T>::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) {
    if (is_trainable(e.kind)) n += e.tensor.numel();
  }
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() const {
  for (const auto& e : entries_) e.tensor.zero_grad();
}

template <typename T>
std::size_t ParamStore<T>::copy_matching_from(const ParamStore& other) const {
  std::size_t copied = 0;
  for (const auto& e : entries_) {
    if (!other.contains(e.name)) continue;
    const auto& src = other.get(e.name).tensor;
    if (src.shape() != e.tensor.shape()) continue;
    std::copy(src.data().begin(), src.data().end(), e.tensor.mutable_data().begin());
    ++copied;
  }
  return copied;
}

template <typename T>
bool ParamStore<T>::equals(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.kind != b.kind || a.tensor.shape() != b.tensor.shape()) return false;
    if (!std::equal(a.tensor.data().begin(), a.tensor.data().end(), b.tensor.data().begin())) return false;
  }
  return true;
}

template <typename T>
ParamBuilder<T> ParamBuilder<T>::scope(const std::string& name) const {
  return ParamBuilder(store_, rng_, qualified(name));
}

template <typename T>
std::string ParamBuilder<T>::qualified(const std::string& name) const {
  return prefix_.empty() ? name : prefix_ + "." + name;
}

template <typename T>
Tensor<T> ParamBuilder<T>::fan_in_uniform(const std::string& name, Shape shape, std::int64_t fan_in,
                                          ParamKind kind) {
  if (fan_in < 1) throw ValidationError("fan_in must be positive for '" + qualified(name) + "'");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> values(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& v : values) v = static_cast<T>(dist(rng_));
  return store_.add(qualified(name), Tensor<T>::from_data(std::move(shape), std::move(values)), kind);
}

template <typename T>
Tensor<T> ParamBuilder<T>::constant(const std::string& name, Shape shape, T value, ParamKind kind) {
  return store_.add(qualified(name), Tensor<T>::full(std::move(shape), value), kind);
}

template class ParamStore<float>;
template class ParamStore<double>;
template class ParamBuilder<float>;
template class ParamBuilder<double>;

}  // namespace afnet::nn
