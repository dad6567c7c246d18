#include "afnet/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace afnet::nn {

namespace {

template <typename T>
void require_nchw(const Tensor<T>& x, const char* op) {
  if (x.rank() != 4) throw DimensionError(std::string(op) + " expects NCHW input, got " + shape_to_string(x.shape()));
  if (x.numel() == 0) throw DegenerateInputError(std::string(op) + " on an empty tensor");
}

struct ConvGeometry {
  std::int64_t n, c_in, h, w, c_out, k, h_out, w_out;
  int stride, padding;
  std::int64_t rows() const { return c_in * k * k; }
  std::int64_t cols() const { return h_out * w_out; }
  bool is_pointwise() const { return k == 1 && stride == 1 && padding == 0; }
};

/// Unfolds one image [C_in, H, W] into [C_in*k*k, H_out*W_out]; rows are
/// ordered (ci, ky, kx) and padded taps hold zero.
template <typename T>
void im2col(const T* img, const ConvGeometry& g, T* col) {
  for (std::int64_t ci = 0; ci < g.c_in; ++ci) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        T* row = col + ((ci * g.k + ky) * g.k + kx) * g.cols();
        for (std::int64_t oy = 0; oy < g.h_out; ++oy) {
          const std::int64_t iy = oy * g.stride - g.padding + ky;
          T* dst = row + oy * g.w_out;
          if (iy < 0 || iy >= g.h) {
            std::fill_n(dst, g.w_out, T(0));
            continue;
          }
          const T* src = img + (ci * g.h + iy) * g.w;
          for (std::int64_t ox = 0; ox < g.w_out; ++ox) {
            const std::int64_t ix = ox * g.stride - g.padding + kx;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* img) {
  for (std::int64_t ci = 0; ci < g.c_in; ++ci) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const T* row = col + ((ci * g.k + ky) * g.k + kx) * g.cols();
        for (std::int64_t oy = 0; oy < g.h_out; ++oy) {
          const std::int64_t iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.h) continue;
          T* dst = img + (ci * g.h + iy) * g.w;
          const T* src = row + oy * g.w_out;
          for (std::int64_t ox = 0; ox < g.w_out; ++ox) {
            const std::int64_t ix = ox * g.stride - g.padding + kx;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
T sigmoid_scalar(T v) {
  T s;
  if (v >= T(0)) {
    s = T(1) / (T(1) + std::exp(-v));
  } else {
    const T e = std::exp(v);
    s = e / (T(1) + e);
  }
  constexpr T lo = std::numeric_limits<T>::min();
  constexpr T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
  return std::clamp(s, lo, hi);
}

}  // namespace

std::int64_t conv_output_extent(std::int64_t in, int k, int stride, int padding) {
  if (k < 1 || stride < 1 || padding < 0) {
    throw GeometryError("invalid window geometry: k=" + std::to_string(k) + " stride=" + std::to_string(stride) +
                        " padding=" + std::to_string(padding));
  }
  const std::int64_t span = in + 2 * padding - k;
  if (span < 0) {
    throw GeometryError("window " + std::to_string(k) + " does not fit input extent " + std::to_string(in) +
                        " with padding " + std::to_string(padding));
  }
  return span / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, int stride, int padding) {
  require_nchw(x, "conv2d");
  if (weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
    throw DimensionError("conv2d weight must be [C_out, C_in, k, k], got " + shape_to_string(weight.shape()));
  }
  if (weight.dim(1) != x.dim(1)) {
    throw DimensionError("conv2d: input has " + std::to_string(x.dim(1)) + " channels, weight expects " +
                         std::to_string(weight.dim(1)));
  }
  ConvGeometry g{};
  g.n = x.dim(0);
  g.c_in = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.c_out = weight.dim(0);
  g.k = weight.dim(2);
  g.stride = stride;
  g.padding = padding;
  g.h_out = conv_output_extent(g.h, static_cast<int>(g.k), stride, padding);
  g.w_out = conv_output_extent(g.w, static_cast<int>(g.k), stride, padding);
  const bool has_bias = bias.defined();
  if (has_bias && (bias.numel() != g.c_out)) {
    throw DimensionError("conv2d bias has " + std::to_string(bias.numel()) + " entries, expected " +
                         std::to_string(g.c_out));
  }

  const std::int64_t rows = g.rows(), cols = g.cols();
  std::vector<T> out(static_cast<std::size_t>(g.n * g.c_out * cols));
  std::vector<T> col(g.is_pointwise() ? 0 : static_cast<std::size_t>(rows * cols));
  const T* wdata = weight.data().data();
  for (std::int64_t b = 0; b < g.n; ++b) {
    const T* img = x.data().data() + b * g.c_in * g.h * g.w;
    const T* cm = img;
    if (!g.is_pointwise()) {
      im2col(img, g, col.data());
      cm = col.data();
    }
    T* ob = out.data() + b * g.c_out * cols;
    for (std::int64_t co = 0; co < g.c_out; ++co) {
      T* __restrict orow = ob + co * cols;
      std::fill_n(orow, cols, has_bias ? bias.data()[static_cast<std::size_t>(co)] : T(0));
      const T* wrow = wdata + co * rows;
      for (std::int64_t r = 0; r < rows; ++r) {
        const T wv = wrow[r];
        const T* __restrict crow = cm + r * cols;
        for (std::int64_t p = 0; p < cols; ++p) orow[p] += wv * crow[p];
      }
    }
  }

  std::vector<NodePtr<T>> inputs{x.node(), weight.node()};
  if (has_bias) inputs.push_back(bias.node());
  return make_result<T>(
      "conv2d", {g.n, g.c_out, g.h_out, g.w_out}, std::move(out), std::move(inputs), [g, has_bias](Node<T>& self) {
        auto& nx = *self.inputs[0];
        auto& nw = *self.inputs[1];
        const std::int64_t rows = g.rows(), cols = g.cols();
        std::vector<T> col(g.is_pointwise() ? 0 : static_cast<std::size_t>(rows * cols));
        std::vector<T> dcol(nx.requires_grad && !g.is_pointwise() ? static_cast<std::size_t>(rows * cols) : 0);
        T* gw = nw.requires_grad ? nw.grad_buffer().data() : nullptr;
        T* gb = has_bias && self.inputs[2]->requires_grad ? self.inputs[2]->grad_buffer().data() : nullptr;
        T* gx = nx.requires_grad ? nx.grad_buffer().data() : nullptr;
        const T* wdata = nw.data.data();
        for (std::int64_t b = 0; b < g.n; ++b) {
          const T* gout = self.grad.data() + b * g.c_out * cols;
          if (gb) {
            for (std::int64_t co = 0; co < g.c_out; ++co) {
              T acc = T(0);
              for (std::int64_t p = 0; p < cols; ++p) acc += gout[co * cols + p];
              gb[co] += acc;
            }
          }
          if (gw) {
            const T* img = nx.data.data() + b * g.c_in * g.h * g.w;
            const T* cm = img;
            if (!g.is_pointwise()) {
              im2col(img, g, col.data());
              cm = col.data();
            }
            for (std::int64_t co = 0; co < g.c_out; ++co) {
              const T* grow = gout + co * cols;
              T* gwrow = gw + co * rows;
              for (std::int64_t r = 0; r < rows; ++r) {
                const T* crow = cm + r * cols;
                T acc = T(0);
                for (std::int64_t p = 0; p < cols; ++p) acc += grow[p] * crow[p];
                gwrow[r] += acc;
              }
            }
          }
          if (gx) {
            T* gimg = gx + b * g.c_in * g.h * g.w;
            // Pointwise convs scatter straight into the input grad.
            T* dc = g.is_pointwise() ? gimg : dcol.data();
            if (!g.is_pointwise()) std::fill(dcol.begin(), dcol.end(), T(0));
            for (std::int64_t co = 0; co < g.c_out; ++co) {
              const T* __restrict grow = gout + co * cols;
              const T* wrow = wdata + co * rows;
              for (std::int64_t r = 0; r < rows; ++r) {
                const T wv = wrow[r];
                T* __restrict drow = dc + r * cols;
                for (std::int64_t p = 0; p < cols; ++p) drow[p] += wv * grow[p];
              }
            }
            if (!g.is_pointwise()) col2im(dcol.data(), g, gimg);
          }
        }
      });
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     const Tensor<T>& running_mean, const Tensor<T>& running_var, NormMode mode,
                     const BatchNormOptions& options) {
  if (x.rank() != 4) throw DimensionError("batch_norm expects NCHW input, got " + shape_to_string(x.shape()));
  const std::int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  for (const Tensor<T>* p : {&gamma, &beta, &running_mean, &running_var}) {
    if (p->numel() != c) {
      throw DimensionError("batch_norm: parameter with " + std::to_string(p->numel()) + " entries for " +
                           std::to_string(c) + " channels");
    }
  }
  if (!(options.epsilon > 0.0)) throw ValidationError("batch_norm epsilon must be positive");
  const std::int64_t per_channel = n * plane;
  if (per_channel == 0) throw DegenerateInputError("batch_norm: zero elements per channel");
  if (mode == NormMode::kTrain && per_channel < 2) {
    throw DegenerateInputError("batch_norm train mode needs at least 2 elements per channel, got " +
                               std::to_string(per_channel));
  }

  const T eps = static_cast<T>(options.epsilon);
  const T* px = x.data().data();
  std::vector<T> mean(static_cast<std::size_t>(c)), inv_std(static_cast<std::size_t>(c));
  if (mode == NormMode::kTrain) {
    auto rm = running_mean.mutable_data();
    auto rv = running_var.mutable_data();
    const T m = static_cast<T>(options.momentum);
    for (std::int64_t ch = 0; ch < c; ++ch) {
      T sum = T(0);
      for (std::int64_t b = 0; b < n; ++b) {
        const T* src = px + (b * c + ch) * plane;
        for (std::int64_t i = 0; i < plane; ++i) sum += src[i];
      }
      const T mu = sum / static_cast<T>(per_channel);
      T sq = T(0);
      for (std::int64_t b = 0; b < n; ++b) {
        const T* src = px + (b * c + ch) * plane;
        for (std::int64_t i = 0; i < plane; ++i) sq += (src[i] - mu) * (src[i] - mu);
      }
      const T var = sq / static_cast<T>(per_channel);
      mean[ch] = mu;
      inv_std[ch] = T(1) / std::sqrt(var + eps);
      const T unbiased = sq / static_cast<T>(per_channel - 1);
      rm[ch] = (T(1) - m) * rm[ch] + m * mu;
      rv[ch] = (T(1) - m) * rv[ch] + m * unbiased;
    }
  } else {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      mean[ch] = running_mean.data()[ch];
      const T var = running_var.data()[ch];
      if (var < T(0)) throw ValidationError("batch_norm running_var is negative on channel " + std::to_string(ch));
      inv_std[ch] = T(1) / std::sqrt(var + eps);
    }
  }

  std::vector<T> out(static_cast<std::size_t>(x.numel()));
  const T* pg = gamma.data().data();
  const T* pb = beta.data().data();
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const T* src = px + (b * c + ch) * plane;
      T* dst = out.data() + (b * c + ch) * plane;
      const T a = pg[ch] * inv_std[ch];
      const T mu = mean[ch];
      const T shift = pb[ch];
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = a * (src[i] - mu) + shift;
    }
  }

  const bool train = mode == NormMode::kTrain;
  return make_result<T>(
      "batch_norm", x.shape(), std::move(out), {x.node(), gamma.node(), beta.node()},
      [n, c, plane, per_channel, train, mean = std::move(mean), inv_std = std::move(inv_std)](Node<T>& self) {
        auto& nx = *self.inputs[0];
        auto& ng = *self.inputs[1];
        auto& nb = *self.inputs[2];
        const T* g = self.grad.data();
        const T* px = nx.data.data();
        for (std::int64_t ch = 0; ch < c; ++ch) {
          T sum_g = T(0), sum_gx = T(0);
          for (std::int64_t b = 0; b < n; ++b) {
            const std::int64_t base = (b * c + ch) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
              const T xhat = (px[base + i] - mean[ch]) * inv_std[ch];
              sum_g += g[base + i];
              sum_gx += g[base + i] * xhat;
            }
          }
          if (ng.requires_grad) ng.grad_buffer()[ch] += sum_gx;
          if (nb.requires_grad) nb.grad_buffer()[ch] += sum_g;
          if (!nx.requires_grad) continue;
          T* gx = nx.grad_buffer().data();
          const T gamma_v = ng.data[ch];
          const T k = gamma_v * inv_std[ch];
          const T inv_m = T(1) / static_cast<T>(per_channel);
          for (std::int64_t b = 0; b < n; ++b) {
            const std::int64_t base = (b * c + ch) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
              if (train) {
                const T xhat = (px[base + i] - mean[ch]) * inv_std[ch];
                gx[base + i] += k * (g[base + i] - inv_m * sum_g - xhat * inv_m * sum_gx);
              } else {
                gx[base + i] += k * g[base + i];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> activation(const Tensor<T>& x, Activation kind) {
  std::vector<T> out(x.vec());
  if (kind == Activation::kRelu) {
    for (auto& v : out) v = v > T(0) ? v : T(0);
    return make_result<T>("relu", x.shape(), std::move(out), {x.node()}, [](Node<T>& self) {
      auto& in = *self.inputs[0];
      auto& g = in.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (in.data[i] > T(0)) g[i] += self.grad[i];
      }
    });
  }
  for (auto& v : out) v = sigmoid_scalar(v);
  return make_result<T>("sigmoid", x.shape(), std::move(out), {x.node()}, [](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T s = self.data[i];
      g[i] += self.grad[i] * s * (T(1) - s);
    }
  });
}

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, int k, int stride) {
  require_nchw(x, "max_pool2d");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t ho = conv_output_extent(h, k, stride, 0);
  const std::int64_t wo = conv_output_extent(w, k, stride, 0);
  std::vector<T> out(static_cast<std::size_t>(n * c * ho * wo));
  std::vector<std::int64_t> argmax(out.size());
  const T* px = x.data().data();
  std::size_t o = 0;
  for (std::int64_t bc = 0; bc < n * c; ++bc) {
    const T* plane = px + bc * h * w;
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      for (std::int64_t ox = 0; ox < wo; ++ox, ++o) {
        std::int64_t best = (oy * stride) * w + ox * stride;
        for (std::int64_t ky = 0; ky < k; ++ky) {
          for (std::int64_t kx = 0; kx < k; ++kx) {
            const std::int64_t idx = (oy * stride + ky) * w + ox * stride + kx;
            if (plane[idx] > plane[best]) best = idx;
          }
        }
        out[o] = plane[best];
        argmax[o] = bc * h * w + best;
      }
    }
  }
  return make_result<T>("max_pool2d", {n, c, ho, wo}, std::move(out), {x.node()},
                        [argmax = std::move(argmax)](Node<T>& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
                        });
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  require_nchw(x, "global_avg_pool");
  const std::int64_t nc = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
  const T inv = T(1) / static_cast<T>(plane);
  std::vector<T> out(static_cast<std::size_t>(nc));
  const T* px = x.data().data();
  for (std::int64_t i = 0; i < nc; ++i) {
    T acc = T(0);
    for (std::int64_t p = 0; p < plane; ++p) acc += px[i * plane + p];
    out[i] = acc * inv;
  }
  return make_result<T>("global_avg_pool", {x.dim(0), x.dim(1), 1, 1}, std::move(out), {x.node()},
                        [nc, plane, inv](Node<T>& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::int64_t i = 0; i < nc; ++i) {
                            const T gi = self.grad[i] * inv;
                            for (std::int64_t p = 0; p < plane; ++p) g[i * plane + p] += gi;
                          }
                        });
}

namespace {

/// Per output coordinate: the two source taps and the weight of the second.
struct LerpTable {
  std::vector<std::int64_t> lo, hi;
  std::vector<double> frac;
};

LerpTable make_lerp_table(std::int64_t in, std::int64_t out, int scale, UpsampleMapping mapping) {
  LerpTable t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  for (std::int64_t d = 0; d < out; ++d) {
    double src;
    if (mapping == UpsampleMapping::kHalfPixel) {
      src = (static_cast<double>(d) + 0.5) / scale - 0.5;
    } else {
      src = out > 1 ? static_cast<double>(d) * static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
    }
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::int64_t>(std::floor(src));
    t.lo[d] = lo;
    t.hi[d] = std::min(lo + 1, in - 1);
    t.frac[d] = src - static_cast<double>(lo);
  }
  return t;
}

}  // namespace

template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& x, int scale, UpsampleMapping mapping) {
  require_nchw(x, "bilinear_upsample");
  if (scale < 1) throw GeometryError("bilinear_upsample scale must be >= 1, got " + std::to_string(scale));
  const std::int64_t nc = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t ho = h * scale, wo = w * scale;
  auto ty = make_lerp_table(h, ho, scale, mapping);
  auto tx = make_lerp_table(w, wo, scale, mapping);
  std::vector<T> out(static_cast<std::size_t>(nc * ho * wo));
  const T* px = x.data().data();
  for (std::int64_t i = 0; i < nc; ++i) {
    const T* src = px + i * h * w;
    T* dst = out.data() + i * ho * wo;
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      const T fy = static_cast<T>(ty.frac[oy]);
      const T* r0 = src + ty.lo[oy] * w;
      const T* r1 = src + ty.hi[oy] * w;
      for (std::int64_t ox = 0; ox < wo; ++ox) {
        const T fx = static_cast<T>(tx.frac[ox]);
        const T top = r0[tx.lo[ox]] * (T(1) - fx) + r0[tx.hi[ox]] * fx;
        const T bot = r1[tx.lo[ox]] * (T(1) - fx) + r1[tx.hi[ox]] * fx;
        dst[oy * wo + ox] = top * (T(1) - fy) + bot * fy;
      }
    }
  }
  return make_result<T>("bilinear_upsample", {x.dim(0), x.dim(1), ho, wo}, std::move(out), {x.node()},
                        [nc, h, w, ho, wo, ty = std::move(ty), tx = std::move(tx)](Node<T>& self) {
                          auto& gbuf = self.inputs[0]->grad_buffer();
                          for (std::int64_t i = 0; i < nc; ++i) {
                            T* gsrc = gbuf.data() + i * h * w;
                            const T* gdst = self.grad.data() + i * ho * wo;
                            for (std::int64_t oy = 0; oy < ho; ++oy) {
                              const T fy = static_cast<T>(ty.frac[oy]);
                              T* r0 = gsrc + ty.lo[oy] * w;
                              T* r1 = gsrc + ty.hi[oy] * w;
                              for (std::int64_t ox = 0; ox < wo; ++ox) {
                                const T fx = static_cast<T>(tx.frac[ox]);
                                const T gv = gdst[oy * wo + ox];
                                r0[tx.lo[ox]] += gv * (T(1) - fy) * (T(1) - fx);
                                r0[tx.hi[ox]] += gv * (T(1) - fy) * fx;
                                r1[tx.lo[ox]] += gv * fy * (T(1) - fx);
                                r1[tx.hi[ox]] += gv * fy * fx;
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> softmax_over_classes(const Tensor<T>& logits) {
  require_nchw(logits, "softmax_over_classes");
  const std::int64_t n = logits.dim(0), k = logits.dim(1), plane = logits.dim(2) * logits.dim(3);
  if (k < 2) throw DimensionError("softmax_over_classes needs K >= 2, got " + std::to_string(k));
  std::vector<T> out(static_cast<std::size_t>(logits.numel()));
  const T* px = logits.data().data();
  for (std::int64_t b = 0; b < n; ++b) {
    const T* src = px + b * k * plane;
    T* dst = out.data() + b * k * plane;
    for (std::int64_t p = 0; p < plane; ++p) {
      T mx = src[p];
      for (std::int64_t c = 1; c < k; ++c) mx = std::max(mx, src[c * plane + p]);
      T total = T(0);
      for (std::int64_t c = 0; c < k; ++c) {
        const T e = std::exp(src[c * plane + p] - mx);
        dst[c * plane + p] = e;
        total += e;
      }
      const T inv = T(1) / total;
      for (std::int64_t c = 0; c < k; ++c) dst[c * plane + p] *= inv;
    }
  }
  return make_result<T>("softmax_over_classes", logits.shape(), std::move(out), {logits.node()},
                        [n, k, plane](Node<T>& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::int64_t b = 0; b < n; ++b) {
                            const T* s = self.data.data() + b * k * plane;
                            const T* gy = self.grad.data() + b * k * plane;
                            T* gx = g.data() + b * k * plane;
                            for (std::int64_t p = 0; p < plane; ++p) {
                              T dot = T(0);
                              for (std::int64_t c = 0; c < k; ++c) dot += gy[c * plane + p] * s[c * plane + p];
                              for (std::int64_t c = 0; c < k; ++c) {
                                gx[c * plane + p] += s[c * plane + p] * (gy[c * plane + p] - dot);
                              }
                            }
                          }
                        });
}

#define AFNET_INSTANTIATE(T)                                                                                     \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);                    \
  template Tensor<T> batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                const Tensor<T>&, NormMode, const BatchNormOptions&);                           \
  template Tensor<T> activation(const Tensor<T>&, Activation);                                                  \
  template Tensor<T> max_pool2d(const Tensor<T>&, int, int);                                                    \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                                         \
  template Tensor<T> bilinear_upsample(const Tensor<T>&, int, UpsampleMapping);                                 \
  template Tensor<T> softmax_over_classes(const Tensor<T>&);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)
#undef AFNET_INSTANTIATE

}  // namespace afnet::nn
