#include "afnet/core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace afnet {

namespace {

template <typename T>
T eval_scalar(const Tensor<T>& y) {
  for (auto e : y.shape()) {
    if (e != 1) throw ContractError("gradient check needs a scalar function, got shape " + shape_to_string(y.shape()));
  }
  return y.data()[0];
}

template <typename T>
T central_difference(const std::function<Tensor<T>()>& f, const Tensor<T>& x, std::size_t i, T eps) {
  auto data = x.mutable_data();
  const T saved = data[i];
  data[i] = saved + eps;
  const T plus = eval_scalar(f());
  data[i] = saved - eps;
  const T minus = eval_scalar(f());
  data[i] = saved;
  return (plus - minus) / (T(2) * eps);
}

constexpr double kReprobeAbove = 1e-7;

}  // namespace

template <typename T>
Tensor<T> finite_difference_gradient(const ScalarFn<T>& f, const Tensor<T>& x, T eps) {
  if (!(eps > T(0))) throw ContractError("finite_difference_gradient needs eps > 0");
  NoGradGuard guard;
  std::vector<T> out(static_cast<std::size_t>(x.numel()));
  std::function<Tensor<T>()> bound = [&] { return f(x); };
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = central_difference<T>(bound, x, i, eps);
  return Tensor<T>::from_data(x.shape(), std::move(out));
}

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

template <typename T>
GradCheckResult check_gradients(const std::function<Tensor<T>()>& loss_fn,
                                const std::vector<std::pair<std::string, Tensor<T>>>& inputs, T eps,
                                std::int64_t max_elements_per_input, std::uint64_t seed) {
  for (const auto& [name, t] : inputs) t.set_requires_grad(true);
  Tensor<T> loss = loss_fn();
  backward(loss);

  std::mt19937_64 rng(seed);
  GradCheckResult result;
  NoGradGuard guard;
  for (const auto& [name, t] : inputs) {
    std::vector<std::size_t> indices(static_cast<std::size_t>(t.numel()));
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (max_elements_per_input > 0 && static_cast<std::int64_t>(indices.size()) > max_elements_per_input) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(static_cast<std::size_t>(max_elements_per_input));
    }
    const std::vector<T> analytic = t.has_grad() ? std::vector<T>(t.grad().begin(), t.grad().end())
                                                 : std::vector<T>(static_cast<std::size_t>(t.numel()), T(0));
    for (std::size_t i : indices) {
      double err = gradient_relative_error(analytic[i], central_difference<T>(loss_fn, t, i, eps));
      if (err > kReprobeAbove) {
        // A ReLU or max-pool kink inside [x - eps, x + eps] biases the
        // difference quotient; a narrower interval usually clears it.
        const double narrow = gradient_relative_error(analytic[i], central_difference<T>(loss_fn, t, i, eps / 10));
        err = std::min(err, narrow);
        ++result.reprobed;
      }
      ++result.elements_checked;
      if (err > result.max_relative_error || result.worst_index < 0) {
        result.max_relative_error = err;
        result.worst_input = name;
        result.worst_index = static_cast<std::int64_t>(i);
      }
    }
  }
  return result;
}

template Tensor<float> finite_difference_gradient(const ScalarFn<float>&, const Tensor<float>&, float);
template Tensor<double> finite_difference_gradient(const ScalarFn<double>&, const Tensor<double>&, double);
template GradCheckResult check_gradients(const std::function<Tensor<float>()>&,
                                         const std::vector<std::pair<std::string, Tensor<float>>>&, float,
                                         std::int64_t, std::uint64_t);
template GradCheckResult check_gradients(const std::function<Tensor<double>()>&,
                                         const std::vector<std::pair<std::string, Tensor<double>>>&, double,
                                         std::int64_t, std::uint64_t);

}  // namespace afnet
