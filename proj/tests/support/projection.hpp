#pragma once

#include "afnet/core/ops.hpp"
#include "support/oracles.hpp"

namespace testing_support {

/// sum(y * r) with a fixed random projection r, turning any map into a
/// scalar whose gradient exercises every output element.
inline afnet::TensorD projected(const afnet::TensorD& y, std::uint64_t seed) {
  return afnet::sum_all(afnet::mul(y, oracle::random_tensor<double>(y.shape(), seed)));
}

}  // namespace testing_support
