#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "afnet/core/gradcheck.hpp"

namespace afnet::verify {

/// One finite-difference check, run once per seed in double precision.
struct GradCase {
  std::string name;
  double threshold = 1e-6;
  std::function<GradCheckResult(std::uint64_t seed)> run;
};

struct GradRow {
  std::string name;
  double max_error = 0.0;
  double threshold = 0.0;
  std::int64_t elements = 0;
  int seeds = 0;
  double seconds = 0.0;
  std::string worst;  // "input[index]" of the worst element

  bool passed() const { return max_error < threshold; }
};

/// Every primitive op and layer (threshold 1e-6) and every fused block.
std::vector<GradCase> primitive_and_block_cases();
/// Tiny MPVN-RM under the deep-supervision loss (threshold 1e-3).
GradCase full_model_case();
std::vector<GradCase> standard_gradient_cases();

std::vector<GradRow> run_gradient_cases(const std::vector<GradCase>& cases, int seeds);

/// Fixed-width table, one row per case, ending with an overall verdict.
std::string format_grad_table(const std::vector<GradRow>& rows);

}  // namespace afnet::verify
