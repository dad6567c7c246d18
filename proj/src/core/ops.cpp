#include "afnet/core/ops.hpp"

#include <algorithm>
#include <string>

namespace afnet {

namespace {

/// Strides of `shape` right-aligned into `rank` axes, 0 on broadcast axes.
std::vector<std::int64_t> broadcast_strides(const Shape& shape, const Shape& out) {
  const std::size_t rank = out.size();
  std::vector<std::int64_t> strides(rank, 0);
  const std::size_t offset = rank - shape.size();
  std::int64_t s = 1;
  for (std::size_t i = shape.size(); i-- > 0;) {
    strides[i + offset] = shape[i] == 1 ? 0 : s;
    s *= shape[i];
  }
  return strides;
}

/// Calls fn(out_index, a_index, b_index) for every output element in
/// row-major order.
template <typename Fn>
void for_each_broadcast(const Shape& out, const std::vector<std::int64_t>& sa,
                        const std::vector<std::int64_t>& sb, Fn&& fn) {
  const std::size_t rank = out.size();
  const std::int64_t total = shape_numel(out);
  if (total == 0) return;
  if (rank == 0) {
    fn(0, 0, 0);
    return;
  }
  std::vector<std::int64_t> idx(rank, 0);
  std::int64_t ia = 0, ib = 0;
  const std::int64_t inner = out[rank - 1];
  const std::int64_t ja = sa[rank - 1], jb = sb[rank - 1];
  for (std::int64_t i = 0; i < total; i += inner) {
    std::int64_t a = ia, b = ib;
    for (std::int64_t k = 0; k < inner; ++k, a += ja, b += jb) fn(i + k, a, b);
    // Advance the outer multi-index (all axes but the last).
    for (std::size_t ax = rank - 1; ax-- > 0;) {
      ++idx[ax];
      ia += sa[ax];
      ib += sb[ax];
      if (idx[ax] < out[ax]) break;
      ia -= sa[ax] * out[ax];
      ib -= sb[ax] * out[ax];
      idx[ax] = 0;
    }
  }
}

void require_rank4(const Shape& s, const char* what) {
  if (s.size() != 4) {
    throw DimensionError(std::string(what) + " expects an NCHW tensor, got " + shape_to_string(s));
  }
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t ea = i + a.size() >= rank ? a[i + a.size() - rank] : 1;
    const std::int64_t eb = i + b.size() >= rank ? b[i + b.size() - rank] : 1;
    if (ea != eb && ea != 1 && eb != 1) {
      throw DimensionError("cannot broadcast " + shape_to_string(a) + " with " + shape_to_string(b) +
                           ": mismatch on axis " + std::to_string(i) + " (" + std::to_string(ea) + " vs " +
                           std::to_string(eb) + ")");
    }
    out[i] = std::max(ea, eb);
  }
  return out;
}

template <typename T>
Tensor<T> broadcast_binary(BinaryKind kind, const Tensor<T>& a, const Tensor<T>& b) {
  Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const auto sa = broadcast_strides(a.shape(), out_shape);
  const auto sb = broadcast_strides(b.shape(), out_shape);
  std::vector<T> out(static_cast<std::size_t>(shape_numel(out_shape)));
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  switch (kind) {
    case BinaryKind::kAdd:
      for_each_broadcast(out_shape, sa, sb, [&](auto i, auto ia, auto ib) { out[i] = pa[ia] + pb[ib]; });
      break;
    case BinaryKind::kSub:
      for_each_broadcast(out_shape, sa, sb, [&](auto i, auto ia, auto ib) { out[i] = pa[ia] - pb[ib]; });
      break;
    case BinaryKind::kMul:
      for_each_broadcast(out_shape, sa, sb, [&](auto i, auto ia, auto ib) { out[i] = pa[ia] * pb[ib]; });
      break;
  }
  const char* name = kind == BinaryKind::kAdd ? "add" : kind == BinaryKind::kSub ? "sub" : "mul";
  Shape shape_copy = out_shape;
  return make_result<T>(
      name, std::move(out_shape), std::move(out), {a.node(), b.node()},
      [kind, shape = std::move(shape_copy), sa, sb](Node<T>& self) {
        auto& na = *self.inputs[0];
        auto& nb = *self.inputs[1];
        const T* g = self.grad.data();
        if (na.requires_grad) {
          T* ga = na.grad_buffer().data();
          if (kind == BinaryKind::kMul) {
            const T* pb = nb.data.data();
            for_each_broadcast(shape, sa, sb, [&](auto i, auto ia, auto ib) { ga[ia] += g[i] * pb[ib]; });
          } else {
            for_each_broadcast(shape, sa, sb, [&](auto i, auto ia, auto) { ga[ia] += g[i]; });
          }
        }
        if (nb.requires_grad) {
          T* gb = nb.grad_buffer().data();
          if (kind == BinaryKind::kMul) {
            const T* pa = na.data.data();
            for_each_broadcast(shape, sa, sb, [&](auto i, auto ia, auto ib) { gb[ib] += g[i] * pa[ia]; });
          } else if (kind == BinaryKind::kSub) {
            for_each_broadcast(shape, sa, sb, [&](auto i, auto, auto ib) { gb[ib] -= g[i]; });
          } else {
            for_each_broadcast(shape, sa, sb, [&](auto i, auto, auto ib) { gb[ib] += g[i]; });
          }
        }
      });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.vec());
  for (auto& v : out) v *= factor;
  return make_result<T>("scale", x.shape(), std::move(out), {x.node()}, [factor](Node<T>& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * self.grad[i];
  });
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_channels needs at least one part");
  const Shape& first = parts.front().shape();
  require_rank4(first, "concat_channels");
  std::int64_t channels = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Shape& s = parts[p].shape();
    require_rank4(s, "concat_channels");
    for (std::size_t ax : {0u, 2u, 3u}) {
      if (s[ax] != first[ax]) {
        throw DimensionError("concat_channels: part " + std::to_string(p) + " has shape " + shape_to_string(s) +
                             ", expected N/H/W of " + shape_to_string(first) + " (axis " + std::to_string(ax) +
                             ")");
      }
    }
    channels += s[1];
  }
  const std::int64_t n = first[0];
  const std::int64_t plane = first[2] * first[3];
  Shape out_shape{n, channels, first[2], first[3]};
  std::vector<T> out(static_cast<std::size_t>(shape_numel(out_shape)));
  std::vector<std::int64_t> offsets;
  std::int64_t c0 = 0;
  for (const auto& part : parts) {
    offsets.push_back(c0);
    const std::int64_t pc = part.dim(1);
    const T* src = part.data().data();
    for (std::int64_t b = 0; b < n; ++b) {
      std::copy_n(src + b * pc * plane, pc * plane, out.data() + (b * channels + c0) * plane);
    }
    c0 += pc;
  }
  std::vector<NodePtr<T>> inputs;
  for (const auto& part : parts) inputs.push_back(part.node());
  return make_result<T>("concat_channels", std::move(out_shape), std::move(out), std::move(inputs),
                        [offsets, n, channels, plane](Node<T>& self) {
                          for (std::size_t p = 0; p < self.inputs.size(); ++p) {
                            auto& in = *self.inputs[p];
                            if (!in.requires_grad) continue;
                            const std::int64_t pc = in.shape[1];
                            auto& g = in.grad_buffer();
                            for (std::int64_t b = 0; b < n; ++b) {
                              const T* src = self.grad.data() + (b * channels + offsets[p]) * plane;
                              T* dst = g.data() + b * pc * plane;
                              for (std::int64_t i = 0; i < pc * plane; ++i) dst[i] += src[i];
                            }
                          }
                        });
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count) {
  require_rank4(x.shape(), "slice_channels");
  const std::int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (begin < 0 || count < 1 || begin + count > c) {
    throw DimensionError("slice_channels: range [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                         ") outside " + std::to_string(c) + " channels");
  }
  Shape out_shape{n, count, x.dim(2), x.dim(3)};
  std::vector<T> out(static_cast<std::size_t>(shape_numel(out_shape)));
  for (std::int64_t b = 0; b < n; ++b) {
    std::copy_n(x.data().data() + (b * c + begin) * plane, count * plane, out.data() + b * count * plane);
  }
  return make_result<T>("slice_channels", std::move(out_shape), std::move(out), {x.node()},
                        [n, c, plane, begin, count](Node<T>& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::int64_t b = 0; b < n; ++b) {
                            const T* src = self.grad.data() + b * count * plane;
                            T* dst = g.data() + (b * c + begin) * plane;
                            for (std::int64_t i = 0; i < count * plane; ++i) dst[i] += src[i];
                          }
                        });
}

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, const std::vector<int>& axes) {
  if (x.numel() == 0) throw DegenerateInputError("reduce_mean of an empty tensor");
  const Shape& in_shape = x.shape();
  const int rank = static_cast<int>(in_shape.size());
  std::vector<bool> reduced(static_cast<std::size_t>(rank), false);
  for (int a : axes) {
    if (a < 0 || a >= rank) {
      throw DimensionError("reduce_mean: axis " + std::to_string(a) + " invalid for shape " +
                           shape_to_string(in_shape));
    }
    reduced[static_cast<std::size_t>(a)] = true;
  }
  Shape out_shape = in_shape;
  std::int64_t count = 1;
  for (int a = 0; a < rank; ++a) {
    if (reduced[static_cast<std::size_t>(a)]) {
      count *= in_shape[static_cast<std::size_t>(a)];
      out_shape[static_cast<std::size_t>(a)] = 1;
    }
  }
  // Output strides broadcast back over the input: zero on reduced axes.
  const auto so = broadcast_strides(out_shape, in_shape);
  const std::vector<std::int64_t> unit(static_cast<std::size_t>(rank), 0);
  std::vector<T> out(static_cast<std::size_t>(shape_numel(out_shape)), T(0));
  const T* px = x.data().data();
  for_each_broadcast(in_shape, so, unit, [&](auto i, auto io, auto) { out[io] += px[i]; });
  const T inv = T(1) / static_cast<T>(count);
  for (auto& v : out) v *= inv;
  return make_result<T>("reduce_mean", std::move(out_shape), std::move(out), {x.node()},
                        [in_shape, so, unit, inv](Node<T>& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          const T* go = self.grad.data();
                          for_each_broadcast(in_shape, so, unit, [&](auto i, auto io, auto) { g[i] += go[io] * inv; });
                        });
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
  std::vector<int> axes(x.rank());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = static_cast<int>(i);
  return reduce_mean(x, axes);
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.data()) total += v;
  return make_result<T>("sum_all", {1}, {total}, {x.node()}, [](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape " + shape_to_string(x.shape()) + " -> " + shape_to_string(shape) +
                         " changes the element count");
  }
  return make_result<T>("reshape", std::move(shape), x.vec(), {x.node()}, [](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

#define AFNET_INSTANTIATE(T)                                                                  \
  template Tensor<T> broadcast_binary(BinaryKind, const Tensor<T>&, const Tensor<T>&);       \
  template Tensor<T> scale(const Tensor<T>&, T);                                             \
  template Tensor<T> concat_channels(const std::vector<Tensor<T>>&);                         \
  template Tensor<T> slice_channels(const Tensor<T>&, std::int64_t, std::int64_t);           \
  template Tensor<T> reduce_mean(const Tensor<T>&, const std::vector<int>&);                 \
  template Tensor<T> mean_all(const Tensor<T>&);                                             \
  template Tensor<T> sum_all(const Tensor<T>&);                                              \
  template Tensor<T> reshape(const Tensor<T>&, Shape);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)
#undef AFNET_INSTANTIATE

}  // namespace afnet
