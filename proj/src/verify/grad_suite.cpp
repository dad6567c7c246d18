#include "afnet/verify/grad_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "afnet/arch/model.hpp"
#include "afnet/core/ops.hpp"
#include "afnet/nn/layers.hpp"
#include "afnet/train/loss.hpp"

namespace afnet::verify {

namespace {

using Inputs = std::vector<std::pair<std::string, TensorD>>;
using nn::NormMode;

constexpr double kEps = 1e-5;
// Ops that are linear in every single input element have no truncation
// error, so a wider step only shrinks round-off.
constexpr double kLinearEps = 1e-3;

TensorD random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = dist(rng);
  return TensorD::from_data(std::move(shape), std::move(v));
}

LabelMap random_labels(std::int64_t n, std::int64_t h, std::int64_t w, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, classes - 1);
  LabelMap m(n, h, w);
  for (auto& v : m.values) v = static_cast<std::uint8_t>(dist(rng));
  return m;
}

/// sum(y * r) for a fixed random r.
TensorD projected(const TensorD& y, std::uint64_t seed) {
  return sum_all(mul(y, random_tensor(y.shape(), seed + 1000)));
}

void randomize(const nn::ParamStore<double>& store, std::uint64_t seed) {
  std::uint64_t k = seed;
  for (const auto& e : store.entries()) {
    if (!nn::is_trainable(e.kind)) continue;
    auto r = random_tensor(e.tensor.shape(), ++k * 7919, -0.5, 0.5);
    std::copy(r.vec().begin(), r.vec().end(), e.tensor.mutable_data().begin());
  }
}

Inputs trainable(const nn::ParamStore<double>& store, Inputs extra = {}) {
  for (const auto& e : store.entries())
    if (nn::is_trainable(e.kind)) extra.emplace_back(e.name, e.tensor);
  return extra;
}

GradCase make_case(std::string name, std::function<GradCheckResult(std::uint64_t)> run, double threshold = 1e-6) {
  return {std::move(name), threshold, std::move(run)};
}

/// Builds one block in a fresh store and checks it against its inputs.
template <typename Make, typename Loss>
GradCase block_case(std::string name, Make make, Loss loss) {
  return make_case(std::move(name), [make, loss](std::uint64_t seed) {
    nn::ParamStore<double> store;
    std::mt19937_64 rng(seed);
    nn::ParamBuilder<double> b(store, rng);
    auto params = make(b);
    randomize(store, seed + 100);
    Inputs inputs;
    auto fn = loss(params, seed, inputs);
    return check_gradients<double>(fn, trainable(store, inputs), kEps);
  });
}

}  // namespace

std::vector<GradCase> primitive_and_block_cases() {
  std::vector<GradCase> cases;
  cases.push_back(make_case("add_broadcast", [](std::uint64_t s) {
    auto a = random_tensor({2, 3, 4, 4}, s), b = random_tensor({1, 3, 1, 1}, s + 1);
    return check_gradients<double>([=] { return projected(add(a, b), s); }, {{"a", a}, {"b", b}}, kLinearEps);
  }));
  cases.push_back(make_case("mul_broadcast", [](std::uint64_t s) {
    auto a = random_tensor({2, 3, 4, 4}, s), b = random_tensor({2, 1, 4, 4}, s + 1);
    return check_gradients<double>([=] { return projected(mul(a, b), s); }, {{"a", a}, {"b", b}}, kLinearEps);
  }));
  cases.push_back(make_case("concat_slice", [](std::uint64_t s) {
    auto a = random_tensor({2, 2, 3, 3}, s), b = random_tensor({2, 3, 3, 3}, s + 1);
    return check_gradients<double>(
        [=] { return projected(slice_channels(concat_channels<double>({a, b}), 1, 3), s); },
        {{"a", a}, {"b", b}}, kLinearEps);
  }));
  cases.push_back(make_case("reduce_mean", [](std::uint64_t s) {
    auto x = random_tensor({2, 3, 4, 5}, s);
    return check_gradients<double>([=] { return projected(reduce_mean(x, {2, 3}), s); }, {{"x", x}}, kLinearEps);
  }));
  cases.push_back(make_case("conv2d", [](std::uint64_t s) {
    auto x = random_tensor({2, 3, 5, 5}, s), w = random_tensor({4, 3, 3, 3}, s + 1), b = random_tensor({4}, s + 2);
    GradCheckResult worst;
    for (int stride : {1, 2}) {
      auto r = check_gradients<double>([=] { return projected(nn::conv2d(x, w, b, stride, 1), s); },
                                       {{"x", x}, {"w", w}, {"b", b}}, kLinearEps);
      if (r.max_relative_error >= worst.max_relative_error) {
        r.elements_checked += worst.elements_checked;
        worst = r;
      } else {
        worst.elements_checked += r.elements_checked;
      }
    }
    return worst;
  }));
  for (auto mode : {NormMode::kTrain, NormMode::kEval}) {
    cases.push_back(make_case(mode == NormMode::kTrain ? "batch_norm_train" : "batch_norm_eval",
                              [mode](std::uint64_t s) {
      auto x = random_tensor({2, 3, 3, 3}, s), g = random_tensor({3}, s + 1, 0.5, 1.5);
      auto b = random_tensor({3}, s + 2), rm = random_tensor({3}, s + 3), rv = random_tensor({3}, s + 4, 0.5, 2.0);
      auto rm_copy = rm.clone(), rv_copy = rv.clone();
      return check_gradients<double>(
          [=] {
            std::copy(rm.vec().begin(), rm.vec().end(), rm_copy.mutable_data().begin());
            std::copy(rv.vec().begin(), rv.vec().end(), rv_copy.mutable_data().begin());
            return projected(nn::batch_norm(x, g, b, rm_copy, rv_copy, mode), s);
          },
          {{"x", x}, {"gamma", g}, {"beta", b}}, kEps);
    }));
  }
  cases.push_back(make_case("relu", [](std::uint64_t s) {
    auto x = random_tensor({2, 3, 4, 4}, s);
    return check_gradients<double>([=] { return projected(nn::relu(x), s); }, {{"x", x}}, kEps);
  }));
  cases.push_back(make_case("sigmoid", [](std::uint64_t s) {
    auto x = random_tensor({2, 3, 4, 4}, s, -4.0, 4.0);
    return check_gradients<double>([=] { return projected(nn::sigmoid(x), s); }, {{"x", x}}, kEps);
  }));
  cases.push_back(make_case("max_pool2d", [](std::uint64_t s) {
    auto x = random_tensor({2, 2, 6, 6}, s);
    return check_gradients<double>([=] { return projected(nn::max_pool2d(x, 2, 2), s); }, {{"x", x}}, kEps);
  }));
  cases.push_back(make_case("global_avg_pool", [](std::uint64_t s) {
    auto x = random_tensor({2, 3, 4, 5}, s);
    return check_gradients<double>([=] { return projected(nn::global_avg_pool(x), s); }, {{"x", x}}, kLinearEps);
  }));
  for (auto mapping : {nn::UpsampleMapping::kHalfPixel, nn::UpsampleMapping::kAlignCorners}) {
    cases.push_back(make_case(mapping == nn::UpsampleMapping::kHalfPixel ? "bilinear_half_pixel"
                                                                         : "bilinear_align_corners",
                              [mapping](std::uint64_t s) {
      auto x = random_tensor({1, 2, 3, 4}, s);
      return check_gradients<double>([=] { return projected(nn::bilinear_upsample(x, 2, mapping), s); },
                                     {{"x", x}}, kLinearEps);
    }));
  }
  cases.push_back(make_case("softmax", [](std::uint64_t s) {
    auto x = random_tensor({2, 4, 3, 3}, s, -3.0, 3.0);
    return check_gradients<double>([=] { return projected(nn::softmax_over_classes(x), s); }, {{"x", x}}, kEps);
  }));
  cases.push_back(make_case("cross_entropy", [](std::uint64_t s) {
    auto x = random_tensor({2, 4, 3, 3}, s, -3.0, 3.0);
    auto labels = random_labels(2, 3, 3, 4, s);
    labels.values[0] = kIgnoreLabel;
    return check_gradients<double>([=] { return train::cross_entropy_loss(x, labels); }, {{"logits", x}}, kEps);
  }));

  using namespace arch;
  cases.push_back(block_case(
      "channel_attention", [](auto& b) { return AttentionParams<double>::create(b.scope("ca"), 6, 6, 2); },
      [](const auto& p, std::uint64_t s, Inputs& in) {
        auto x = random_tensor({2, 6, 4, 4}, s + 1);
        in.emplace_back("x", x);
        return std::function<TensorD()>([=] { return projected(channel_attention(x, p), s); });
      }));
  cases.push_back(block_case(
      "spatial_attention", [](auto& b) { return AttentionParams<double>::create(b.scope("sa"), 6, 1, 2); },
      [](const auto& p, std::uint64_t s, Inputs& in) {
        auto x = random_tensor({2, 6, 4, 4}, s + 1);
        in.emplace_back("x", x);
        return std::function<TensorD()>([=] { return projected(spatial_attention(x, p), s); });
      }));
  cases.push_back(block_case(
      "rrb", [](auto& b) { return RrbParams<double>::create(b.scope("rrb"), 3, 4); },
      [](const auto& p, std::uint64_t s, Inputs& in) {
        auto x = random_tensor({2, 3, 4, 4}, s + 1);
        in.emplace_back("x", x);
        return std::function<TensorD()>([=] { return projected(rrb(x, p, NormMode::kTrain), s); });
      }));
  cases.push_back(block_case(
      "cab", [](auto& b) { return CabParams<double>::create(b.scope("cab"), 4, 2); },
      [](const auto& p, std::uint64_t s, Inputs& in) {
        auto lo = random_tensor({2, 4, 4, 4}, s + 1), hi = random_tensor({2, 4, 4, 4}, s + 2);
        in = {{"low", lo}, {"high", hi}};
        return std::function<TensorD()>([=] { return projected(cab_fuse(lo, hi, p), s); });
      }));
  cases.push_back(block_case(
      "mafb", [](auto& b) { return MafbParams<double>::create(b.scope("mafb"), 3, 2, 4, 2); },
      [](const auto& p, std::uint64_t s, Inputs& in) {
        auto m = random_tensor({2, 3, 4, 4}, s + 1), a = random_tensor({2, 2, 4, 4}, s + 2);
        in = {{"main", m}, {"aux", a}};
        return std::function<TensorD()>([=] { return projected(mafb_fuse(m, a, p, NormMode::kTrain), s); });
      }));
  for (bool caption : {false, true}) {
    cases.push_back(block_case(
        caption ? "rafb_caption_order" : "rafb",
        [caption](auto& b) { return RafbParams<double>::create(b.scope("rafb"), 4, 2, caption); },
        [](const auto& p, std::uint64_t s, Inputs& in) {
          auto lo = random_tensor({2, 4, 4, 4}, s + 1), hi = random_tensor({2, 4, 4, 4}, s + 2);
          in = {{"low", lo}, {"high", hi}};
          return std::function<TensorD()>([=] { return projected(rafb_fuse(lo, hi, p), s); });
        }));
  }
  cases.push_back(block_case(
      "global_context", [](auto& b) { return GlobalContextParams<double>::create(b.scope("gc"), 6, 4); },
      [](const auto& p, std::uint64_t s, Inputs& in) {
        auto x = random_tensor({2, 6, 4, 4}, s + 1);
        in.emplace_back("top", x);
        return std::function<TensorD()>([=] { return projected(global_context(x, p), s); });
      }));
  return cases;
}

GradCase full_model_case() {
  return make_case(
      "full_model_mpvn_rm",
      [](std::uint64_t seed) {
        using namespace arch;
        auto variant = ModelVariant::from_tag(VariantTag::kMPVN_RM, BackboneKind::kTiny, BackboneKind::kTiny, 8, 6);
        auto model = AfNetModel<double>::build(variant, seed + 3);
        auto img = random_tensor({2, 3, 32, 32}, seed + 1);
        auto aux = random_tensor({2, 2, 32, 32}, seed + 2);
        auto labels = random_labels(2, 32, 32, 6, seed + 4);
        auto loss = [&] { return train::deep_supervision_loss(model.forward(img, aux, NormMode::kTrain), labels); };
        return check_gradients<double>(loss, trainable(model.params()), kEps, 1, seed);
      },
      1e-3);
}

std::vector<GradCase> standard_gradient_cases() {
  auto cases = primitive_and_block_cases();
  cases.push_back(full_model_case());
  return cases;
}

std::vector<GradRow> run_gradient_cases(const std::vector<GradCase>& cases, int seeds) {
  std::vector<GradRow> rows;
  for (const auto& c : cases) {
    GradRow row{c.name, 0.0, c.threshold, 0, seeds, 0.0, {}};
    const auto start = std::chrono::steady_clock::now();
    for (int s = 0; s < seeds; ++s) {
      const auto r = c.run(static_cast<std::uint64_t>(s));
      row.elements += r.elements_checked;
      if (r.max_relative_error >= row.max_error) {
        row.max_error = r.max_relative_error;
        row.worst = r.worst_input + "[" + std::to_string(r.worst_index) + "]";
      }
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_grad_table(const std::vector<GradRow>& rows) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %12s %10s %9s %6s %8s  %s\n", "op", "max_rel_err", "threshold", "elements",
                "seeds", "seconds", "result");
  os << line;
  bool all = true;
  for (const auto& r : rows) {
    all &= r.passed();
    std::snprintf(line, sizeof line, "%-24s %12.3e %10.0e %9lld %6d %8.2f  %s\n", r.name.c_str(), r.max_error,
                  r.threshold, static_cast<long long>(r.elements), r.seeds, r.seconds,
                  r.passed() ? "pass" : ("FAIL at " + r.worst).c_str());
    os << line;
  }
  os << (all ? "all gradient checks passed\n" : "gradient check FAILED\n");
  return os.str();
}

}  // namespace afnet::verify
