#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afnet/nn/checkpoint.hpp"
#include "afnet/nn/param_store.hpp"

namespace afnet::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

/// First/second moment buffers keyed by parameter name, plus the step count.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

/// One Adam update over every trainable parameter. Weight decay enters as
/// g += wd * theta, for parameters whose kind takes decay (conv weights).
/// Moments are accumulated in double precision.
template <typename T>
void adam_step(const nn::ParamStore<T>& params, AdamState& state, double lr);

/// Records named `adam.step`, `adam.m/<param>` and `adam.v/<param>`.
std::vector<nn::CheckpointRecord> adam_to_records(const AdamState& state);
/// Restores moments and step count; parameters absent from the records
/// start from zero moments.
void adam_from_records(AdamState& state, const std::vector<nn::CheckpointRecord>& records);

/// Exponential warmup from lr0 to lr1, then step decay by `step_factor`
/// every `step_interval_epochs`, counted from the end of warmup.
struct LrSchedule {
  double lr0 = 1e-5;
  double lr1 = 1e-3;
  int warmup_epochs = 100;
  int step_interval_epochs = 200;
  double step_factor = 0.1;
  int iters_per_epoch = 1;

  std::vector<std::string> violations() const;
};

double lr_schedule(int epoch, int iter_in_epoch, const LrSchedule& s);

}  // namespace afnet::train
