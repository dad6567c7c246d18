#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "afnet/core/errors.hpp"

namespace afnet {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

template <typename T>
struct Node;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

/// One vertex of the computation graph. Leaves have no inputs and no
/// backward rule; every op result records its inputs and a closure that
/// reads `grad` and accumulates into the inputs' grads.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a backward pass reaches this node
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<NodePtr<T>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty(); }
  /// Grad buffer sized to `data`, zero-filled on first use.
  std::vector<T>& grad_buffer();
};

/// Dense row-major tensor handle (NCHW for feature maps).
///
/// Copying a Tensor copies the handle, not the storage: like a shared_ptr,
/// const-ness of the handle does not make the buffer immutable. Op results
/// should be treated as read-only; only leaves (parameters, inputs, running
/// statistics) are written through `mutable_data()`.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(NodePtr<T> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->data.size()); }

  // Views into storage are lvalue-only: a temporary handle may own the buffer.
  std::span<const T> data() const& { return node_->data; }
  std::span<const T> data() const&& = delete;
  std::span<T> mutable_data() const& { return node_->data; }
  std::span<T> mutable_data() const&& = delete;
  const std::vector<T>& vec() const& { return node_->data; }
  const std::vector<T>& vec() const&& = delete;
  std::vector<T> to_vector() const { return node_->data; }
  T item() const;
  T at(std::initializer_list<std::int64_t> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  /// Only valid on leaves.
  void set_requires_grad(bool value) const;
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const& { return node_->grad; }
  std::span<const T> grad() const&& = delete;
  Tensor grad_tensor() const;
  void zero_grad() const { node_->grad.clear(); }

  /// Same storage values, fresh leaf with no graph.
  Tensor detach() const;
  /// Deep copy into a new leaf.
  Tensor clone() const;

  /// Value converted to another precision (new leaf, no graph).
  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(node_->data.begin(), node_->data.end());
    return Tensor<U>::from_data(node_->shape, std::move(out));
  }

  const NodePtr<T>& node() const { return node_; }

 private:
  NodePtr<T> node_;
};

/// Builds an op result. `backward` may be empty when no input needs grad.
template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      std::vector<NodePtr<T>> inputs, std::function<void(Node<T>&)> backward);

/// Whether new op results record a graph on this thread.
bool grad_mode_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Opt-in NaN/Inf detection on every op result (thread-local, default off).
void set_finite_check(bool enabled);
bool finite_check_enabled();

/// Reverse-mode pass from a scalar loss. Unless `accumulate` is set, grads
/// of every reachable tensor are reset first; intermediate grads are always
/// reset so a graph can be replayed.
template <typename T>
void backward(const Tensor<T>& loss, bool accumulate = false);

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace afnet
