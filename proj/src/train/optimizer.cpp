#include "afnet/train/optimizer.hpp"

#include <cmath>

namespace afnet::train {

template <typename T>
void adam_step(const nn::ParamStore<T>& params, AdamState& state, double lr) {
  const auto& c = state.config;
  for (const auto& e : params.entries()) {
    if (!nn::is_trainable(e.kind)) continue;
    if (!e.tensor.has_grad()) throw ContractError("adam_step: parameter '" + e.name + "' has no gradient");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (const auto& e : params.entries()) {
    if (!nn::is_trainable(e.kind)) continue;
    const std::size_t n = static_cast<std::size_t>(e.tensor.numel());
    auto& m = state.m[e.name];
    auto& v = state.v[e.name];
    m.resize(n, 0.0);
    v.resize(n, 0.0);
    const double wd = nn::takes_weight_decay(e.kind) ? c.weight_decay : 0.0;
    auto theta = e.tensor.mutable_data();
    auto grad = e.tensor.grad();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = static_cast<double>(grad[i]) + wd * static_cast<double>(theta[i]);
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] = static_cast<T>(static_cast<double>(theta[i]) - lr * m_hat / (std::sqrt(v_hat) + c.epsilon));
    }
  }
}

namespace {

RawTensor to_raw(const std::vector<double>& values) {
  RawTensor r;
  r.shape = {static_cast<std::int64_t>(values.size())};
  r.values.assign(values.begin(), values.end());
  return r;
}

}  // namespace

// Moments are narrowed to f32 on disk, which is the only payload type the
// tensor format carries.
std::vector<nn::CheckpointRecord> adam_to_records(const AdamState& state) {
  std::vector<nn::CheckpointRecord> out;
  out.push_back({"adam.step", RawTensor{{1}, {static_cast<float>(state.step)}}});
  for (const auto& [name, m] : state.m) out.push_back({"adam.m/" + name, to_raw(m)});
  for (const auto& [name, v] : state.v) out.push_back({"adam.v/" + name, to_raw(v)});
  return out;
}

void adam_from_records(AdamState& state, const std::vector<nn::CheckpointRecord>& records) {
  state.m.clear();
  state.v.clear();
  state.step = 0;
  for (const auto& r : records) {
    if (r.name == "adam.step") {
      if (r.tensor.values.size() != 1) throw ContractError("adam.step record must hold one value");
      state.step = static_cast<std::int64_t>(r.tensor.values[0]);
    } else if (r.name.rfind("adam.m/", 0) == 0) {
      state.m[r.name.substr(7)].assign(r.tensor.values.begin(), r.tensor.values.end());
    } else if (r.name.rfind("adam.v/", 0) == 0) {
      state.v[r.name.substr(7)].assign(r.tensor.values.begin(), r.tensor.values.end());
    }
  }
}

std::vector<std::string> LrSchedule::violations() const {
  std::vector<std::string> out;
  if (!(lr0 > 0)) out.push_back("lr0 must be > 0");
  if (!(lr1 > 0)) out.push_back("lr1 must be > 0");
  if (warmup_epochs < 0) out.push_back("warmup_epochs must be >= 0");
  if (step_interval_epochs < 1) out.push_back("step_interval_epochs must be >= 1");
  if (!(step_factor > 0 && step_factor < 1)) out.push_back("step_factor must be in (0, 1)");
  if (iters_per_epoch < 1) out.push_back("iters_per_epoch must be >= 1");
  return out;
}

double lr_schedule(int epoch, int iter_in_epoch, const LrSchedule& s) {
  if (epoch < 0) throw ContractError("lr_schedule: epoch must be >= 0");
  if (epoch < s.warmup_epochs) {
    const double current = static_cast<double>(epoch) * s.iters_per_epoch + iter_in_epoch;
    const double total = static_cast<double>(s.warmup_epochs) * s.iters_per_epoch;
    return s.lr0 * std::pow(s.lr1 / s.lr0, current / total);
  }
  const int drops = (epoch - s.warmup_epochs) / s.step_interval_epochs;
  return s.lr1 * std::pow(s.step_factor, drops);
}

template void adam_step(const nn::ParamStore<float>&, AdamState&, double);
template void adam_step(const nn::ParamStore<double>&, AdamState&, double);

}  // namespace afnet::train
