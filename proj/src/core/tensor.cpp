#include "afnet/core/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace afnet {

namespace {

thread_local bool t_grad_mode = true;
thread_local bool t_finite_check = false;

}  // namespace

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) {
    if (e < 0) throw DimensionError("negative extent in shape " + shape_to_string(shape));
    n *= e;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool grad_mode_enabled() { return t_grad_mode; }

NoGradGuard::NoGradGuard() : previous_(t_grad_mode) { t_grad_mode = false; }
NoGradGuard::~NoGradGuard() { t_grad_mode = previous_; }

void set_finite_check(bool enabled) { t_finite_check = enabled; }
bool finite_check_enabled() { return t_finite_check; }

template <typename T>
std::vector<T>& Node<T>::grad_buffer() {
  if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  return grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  auto n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<T>(static_cast<std::size_t>(n), value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_data(Shape shape, std::vector<T> data, bool requires_grad) {
  if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw DimensionError("shape " + shape_to_string(shape) + " does not match buffer of " +
                         std::to_string(data.size()) + " elements");
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (node_->data.size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_to_string(node_->shape));
  }
  return node_->data[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<std::int64_t> index) const {
  const auto& s = node_->shape;
  if (index.size() != s.size()) throw DimensionError("index rank does not match tensor rank");
  std::int64_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i < 0 || i >= s[axis]) throw DimensionError("index out of range on axis " + std::to_string(axis));
    flat = flat * s[axis] + i;
    ++axis;
  }
  return node_->data[static_cast<std::size_t>(flat)];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool value) const {
  if (!node_->is_leaf()) throw ContractError("requires_grad can only be set on leaf tensors");
  node_->requires_grad = value;
}

template <typename T>
Tensor<T> Tensor<T>::grad_tensor() const {
  if (!has_grad()) return zeros(node_->shape);
  return from_data(node_->shape, node_->grad);
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return from_data(node_->shape, node_->data);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return from_data(node_->shape, node_->data, node_->requires_grad);
}

template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data, std::vector<NodePtr<T>> inputs,
                      std::function<void(Node<T>&)> backward_fn) {
  if (t_finite_check) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i])) {
        throw NonFiniteError(std::string("non-finite value produced by ") + op + " at flat index " +
                             std::to_string(i));
      }
    }
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  bool needs_grad = false;
  if (t_grad_mode && backward_fn) {
    for (const auto& in : inputs) needs_grad = needs_grad || in->requires_grad;
  }
  if (needs_grad) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward_fn);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
void backward(const Tensor<T>& loss, bool accumulate) {
  if (!loss.defined()) throw ContractError("backward() on an undefined tensor");
  for (auto e : loss.shape()) {
    if (e != 1) throw ContractError("backward() needs a scalar loss, got shape " + shape_to_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw MissingGraphError("backward() on a tensor with no graph (no input requires grad)");
  }

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (!node->is_leaf() || !accumulate) node->grad.assign(node->data.size(), T(0));
    else node->grad_buffer();
  }
  loss.node()->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward) node->backward(*node);
  }
}

template struct Node<float>;
template struct Node<double>;
template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> make_result(const char*, Shape, std::vector<float>, std::vector<NodePtr<float>>,
                                   std::function<void(Node<float>&)>);
template Tensor<double> make_result(const char*, Shape, std::vector<double>, std::vector<NodePtr<double>>,
                                    std::function<void(Node<double>&)>);
template void backward(const Tensor<float>&, bool);
template void backward(const Tensor<double>&, bool);

}  // namespace afnet
