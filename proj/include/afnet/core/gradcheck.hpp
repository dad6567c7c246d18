#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "afnet/core/tensor.hpp"

namespace afnet {

template <typename T>
using ScalarFn = std::function<Tensor<T>(const Tensor<T>&)>;

/// Central-difference estimate of d f / d x, one element at a time.
/// `x` is perturbed in place and restored; f runs without graph recording.
template <typename T>
Tensor<T> finite_difference_gradient(const ScalarFn<T>& f, const Tensor<T>& x, T eps);

/// Relative error used by every gradient check in the project:
/// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients
/// from turning round-off into large ratios.
double gradient_relative_error(double analytic, double numeric, double floor = 1e-3);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::int64_t elements_checked = 0;
  std::string worst_input;
  std::int64_t worst_index = -1;
  /// Elements re-estimated with a tenth of the step after a poor match.
  std::int64_t reprobed = 0;
};

/// Compares backward() against central differences for a scalar function of
/// several leaf tensors. When `max_elements_per_input` > 0 only that many
/// entries per input are probed (chosen deterministically from `seed`).
/// Elements that disagree are probed again with eps / 10 and the better
/// estimate is kept, so a kink straddled by the wider step is not reported.
template <typename T>
GradCheckResult check_gradients(const std::function<Tensor<T>()>& loss_fn,
                                const std::vector<std::pair<std::string, Tensor<T>>>& inputs, T eps,
                                std::int64_t max_elements_per_input = 0, std::uint64_t seed = 0);

}  // namespace afnet
