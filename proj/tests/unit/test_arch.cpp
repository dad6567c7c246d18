#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "afnet/arch/model.hpp"
#include "afnet/core/gradcheck.hpp"
#include "afnet/core/ops.hpp"
#include "support/oracles.hpp"
#include "support/projection.hpp"

using namespace afnet;
using namespace afnet::arch;
using nn::NormMode;
using testing_support::projected;

namespace {

template <typename T>
void fill(const Tensor<T>& t, T value) {
  if (t.defined()) std::fill(t.mutable_data().begin(), t.mutable_data().end(), value);
}

template <typename T>
void zero_conv(const nn::Conv2d<T>& c) {
  fill(c.weight, T(0));
  fill(c.bias, T(0));
}

template <typename T>
void zero_attention(const AttentionParams<T>& p) {
  zero_conv(p.conv1);
  zero_conv(p.conv2);
}

/// Re-draws every tensor in the store from a seed so biases and BN affine
/// terms are non-trivial too.
template <typename T>
void randomize(const nn::ParamStore<T>& store, std::uint64_t seed, double lo = -0.5, double hi = 0.5) {
  std::uint64_t k = seed;
  for (const auto& e : store.entries()) {
    if (!nn::is_trainable(e.kind)) continue;
    auto r = oracle::random_tensor<T>(e.tensor.shape(), ++k * 7919, lo, hi);
    std::copy(r.vec().begin(), r.vec().end(), e.tensor.mutable_data().begin());
  }
}

template <typename T>
struct Bench {
  nn::ParamStore<T> store;
  std::mt19937_64 rng;
  nn::ParamBuilder<T> b;
  explicit Bench(std::uint64_t seed) : rng(seed), b(store, rng) {}
};

template <typename T>
Tensor<T> attention_oracle(const Tensor<T>& x, const AttentionParams<T>& p, bool pool) {
  auto in = pool ? nn::global_avg_pool(x) : x;
  auto h = nn::relu(nn::conv2d(in, p.conv1.weight, p.conv1.bias, 1, 0));
  return nn::sigmoid(nn::conv2d(h, p.conv2.weight, p.conv2.bias, 1, 0));
}

template <typename T>
Tensor<T> rrb_oracle(const Tensor<T>& x, const RrbParams<T>& p, NormMode mode) {
  auto u = nn::conv2d(x, p.unify.weight, p.unify.bias, 1, 0);
  auto a = nn::conv2d(u, p.conv_a.weight, Tensor<T>{}, 1, 1);
  auto n = nn::relu(nn::batch_norm(a, p.bn.gamma, p.bn.beta, p.bn.running_mean, p.bn.running_var, mode));
  auto g = nn::conv2d(n, p.conv_b.weight, p.conv_b.bias, 1, 1);
  return nn::relu(add(u, g));
}

ModelVariant tiny(VariantTag tag, int width = 16) {
  return ModelVariant::from_tag(tag, BackboneKind::kTiny, BackboneKind::kTiny, width, 6);
}

}  // namespace

TEST_CASE("channel attention") {
  Bench<double> bench(1);
  auto p = AttentionParams<double>::create(bench.b.scope("ca"), 16, 16, 16);
  CHECK(p.conv1.out_channels() == 1);
  auto x = oracle::random_tensor<double>({2, 16, 8, 8}, 3);
  auto y = channel_attention(x, p);
  CHECK(y.shape() == Shape{2, 16, 1, 1});
  CHECK(y.vec() == attention_oracle(x, p, true).to_vector());

  zero_attention(p);
  for (double v : channel_attention(x, p).to_vector()) CHECK(v == 0.5);
  CHECK_THROWS_AS(channel_attention(oracle::random_tensor<double>({1, 8, 4, 4}, 1), p), DimensionError);
}

TEST_CASE("spatial attention") {
  Bench<double> bench(2);
  auto p = AttentionParams<double>::create(bench.b.scope("sa"), 32, 1, 16);
  auto x = oracle::random_tensor<double>({1, 32, 10, 10}, 4);
  auto y = spatial_attention(x, p);
  CHECK(y.shape() == Shape{1, 1, 10, 10});
  CHECK(y.vec() == attention_oracle(x, p, false).to_vector());

  zero_attention(p);
  for (double v : spatial_attention(x, p).to_vector()) CHECK(v == 0.5);

  auto wide = AttentionParams<double>::create(bench.b.scope("wide"), 32, 4, 16);
  CHECK_THROWS_AS(spatial_attention(x, wide), DimensionError);
}

TEST_CASE("attention outputs lie strictly inside (0, 1)") {
  Bench<double> bench(3);
  auto ca = AttentionParams<double>::create(bench.b.scope("ca"), 8, 8, 16);
  auto sa = AttentionParams<double>::create(bench.b.scope("sa"), 8, 1, 16);
  randomize(bench.store, 5, -20, 20);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto x = oracle::random_tensor<double>({1, 8, 4, 4}, seed, -50, 50);
    for (double v : channel_attention(x, ca).to_vector()) CHECK((v > 0.0 && v < 1.0));
    for (double v : spatial_attention(x, sa).to_vector()) CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("channel attention ignores spatial order") {
  Bench<double> bench(4);
  auto ca = AttentionParams<double>::create(bench.b.scope("ca"), 6, 6, 2);
  randomize(bench.store, 9);
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto x = oracle::random_tensor<double>({2, 6, 5, 7}, seed);
    std::vector<int> perm(35);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> shuffled(x.vec().size());
    for (int nc = 0; nc < 12; ++nc)
      for (int i = 0; i < 35; ++i) shuffled[nc * 35 + i] = x.vec()[nc * 35 + perm[i]];
    auto a = channel_attention(x, ca);
    auto b = channel_attention(TensorD::from_data(x.shape(), shuffled), ca);
    for (std::size_t i = 0; i < a.vec().size(); ++i) CHECK(std::abs(a.vec()[i] - b.vec()[i]) <= 1e-12);
  }
}

TEST_CASE("spatial attention commutes with translation") {
  Bench<double> bench(5);
  auto sa = AttentionParams<double>::create(bench.b.scope("sa"), 4, 1, 2);
  randomize(bench.store, 3);
  auto x = oracle::random_tensor<double>({1, 4, 6, 6}, 8);
  auto shift = [](const std::vector<double>& v, int c, int dy, int dx) {
    std::vector<double> out(v.size());
    for (int k = 0; k < c; ++k)
      for (int y = 0; y < 6; ++y)
        for (int xx = 0; xx < 6; ++xx) out[(k * 6 + (y + dy) % 6) * 6 + (xx + dx) % 6] = v[(k * 6 + y) * 6 + xx];
    return out;
  };
  auto y = spatial_attention(x, sa);
  auto ys = spatial_attention(TensorD::from_data(x.shape(), shift(x.vec(), 4, 2, 5)), sa);
  CHECK(ys.vec() == shift(y.vec(), 1, 2, 5));
}

TEST_CASE("rrb") {
  SUBCASE("residual identity") {
    Bench<float> bench(1);
    auto p = RrbParams<float>::create(bench.b.scope("rrb"), 4, 4);
    zero_conv(p.unify);
    for (int c = 0; c < 4; ++c) p.unify.weight.mutable_data()[c * 4 + c] = 1.0f;
    zero_conv(p.conv_a);
    zero_conv(p.conv_b);
    auto x = oracle::random_tensor<float>({2, 4, 5, 5}, 1, 0.0, 3.0);
    CHECK(rrb(x, p, NormMode::kTrain).to_vector() == x.vec());
    CHECK(rrb(x, p, NormMode::kEval).to_vector() == x.vec());
  }
  SUBCASE("shape contract") {
    Bench<float> bench(2);
    auto p = RrbParams<float>::create(bench.b.scope("rrb"), 64, 512);
    auto y = rrb(oracle::random_tensor<float>({1, 64, 8, 8}, 2), p, NormMode::kTrain);
    CHECK(y.shape() == Shape{1, 512, 8, 8});
    CHECK_THROWS_AS(rrb(oracle::random_tensor<float>({1, 32, 8, 8}, 2), p, NormMode::kTrain), DimensionError);
  }
  SUBCASE("composition oracle") {
    for (auto mode : {NormMode::kTrain, NormMode::kEval}) {
      Bench<double> bench(3);
      auto p = RrbParams<double>::create(bench.b.scope("rrb"), 5, 6);
      randomize(bench.store, 4);
      auto x = oracle::random_tensor<double>({2, 5, 6, 6}, 5);
      CHECK(rrb(x, p, mode).to_vector() == rrb_oracle(x, p, mode).to_vector());
    }
  }
}

TEST_CASE("cab_fuse") {
  Bench<double> bench(6);
  auto p = CabParams<double>::create(bench.b.scope("cab"), 8, 16);
  auto low = oracle::random_tensor<double>({2, 8, 4, 4}, 1);
  auto high = oracle::random_tensor<double>({2, 8, 4, 4}, 2);

  auto y = cab_fuse(low, high, p);
  auto w = attention_oracle(concat_channels<double>({low, high}), p.ca, true);
  CHECK(y.vec() == add(mul(w, low), high).to_vector());

  CHECK(cab_fuse(TensorD::zeros(low.shape()), high, p).to_vector() == high.vec());

  zero_attention(p.ca);
  auto z = cab_fuse(low, high, p);
  for (std::size_t i = 0; i < z.vec().size(); ++i) CHECK(z.vec()[i] == 0.5 * low.vec()[i] + high.vec()[i]);

  CHECK_THROWS_AS(cab_fuse(low, oracle::random_tensor<double>({2, 8, 4, 2}, 3), p), DimensionError);
}

TEST_CASE("mafb_fuse") {
  SUBCASE("composition oracle") {
    Bench<double> bench(7);
    auto p = MafbParams<double>::create(bench.b.scope("mafb"), 6, 3, 8, 16);
    randomize(bench.store, 8);
    auto m = oracle::random_tensor<double>({2, 6, 4, 4}, 1);
    auto a = oracle::random_tensor<double>({2, 3, 4, 4}, 2);
    FeatureSink<double> sink;
    auto y = mafb_fuse(m, a, p, NormMode::kTrain, &sink, "f");
    auto xc = concat_channels<double>({rrb_oracle(m, p.rrb_main, NormMode::kTrain),
                                       rrb_oracle(a, p.rrb_aux, NormMode::kTrain)});
    auto sa = attention_oracle(xc, p.sa, false);
    auto ca = attention_oracle(xc, p.ca, true);
    auto expect = nn::conv2d(concat_channels<double>({mul(sa, xc), mul(ca, xc)}), p.reduce.weight, p.reduce.bias, 1, 0);
    CHECK(y.shape() == Shape{2, 8, 4, 4});
    CHECK(y.vec() == expect.vec());
    REQUIRE(sink.maps.size() == 2);
    CHECK(sink.maps[0].first == "f.sa");
    CHECK(sink.maps[0].second.shape() == Shape{2, 1, 4, 4});
    CHECK(sink.maps[1].second.shape() == Shape{2, 16, 1, 1});
  }
  SUBCASE("zero-init attention halves both halves") {
    Bench<double> bench(9);
    auto p = MafbParams<double>::create(bench.b.scope("mafb"), 4, 4, 4, 16);
    zero_attention(p.sa);
    zero_attention(p.ca);
    auto m = oracle::random_tensor<double>({1, 4, 4, 4}, 3);
    auto a = oracle::random_tensor<double>({1, 4, 4, 4}, 4);
    auto xc = concat_channels<double>({rrb_oracle(m, p.rrb_main, NormMode::kTrain),
                                       rrb_oracle(a, p.rrb_aux, NormMode::kTrain)});
    auto half = scale(xc, 0.5);
    auto expect = nn::conv2d(concat_channels<double>({half, half}), p.reduce.weight, p.reduce.bias, 1, 0);
    CHECK(mafb_fuse(m, a, p, NormMode::kTrain).to_vector() == expect.vec());
  }
  SUBCASE("paper-scale width") {
    Bench<float> bench(10);
    auto p = MafbParams<float>::create(bench.b.scope("mafb"), 512, 512, 512, 16);
    auto y = mafb_fuse(oracle::random_tensor<float>({1, 512, 8, 8}, 1), oracle::random_tensor<float>({1, 512, 8, 8}, 2),
                       p, NormMode::kTrain);
    CHECK(y.shape() == Shape{1, 512, 8, 8});
  }
  SUBCASE("geometry mismatch") {
    Bench<double> bench(11);
    auto p = MafbParams<double>::create(bench.b.scope("mafb"), 4, 4, 4, 16);
    CHECK_THROWS_AS(mafb_fuse(oracle::random_tensor<double>({1, 4, 4, 4}, 1),
                              oracle::random_tensor<double>({1, 4, 8, 8}, 1), p, NormMode::kTrain),
                    DimensionError);
  }
}

TEST_CASE("rafb_fuse") {
  Bench<double> bench(12);
  auto p = RafbParams<double>::create(bench.b.scope("rafb"), 8, 16);
  randomize(bench.store, 13);
  auto low = oracle::random_tensor<double>({2, 8, 6, 6}, 1);
  auto high = oracle::random_tensor<double>({2, 8, 6, 6}, 2);
  auto xc = concat_channels<double>({low, high});
  auto ca = attention_oracle(xc, p.ca, true);
  auto sa = attention_oracle(xc, p.sa, false);
  CHECK(rafb_fuse(low, high, p).to_vector() == add(mul(ca, low), mul(sa, high)).to_vector());

  auto swapped = p;
  swapped.caption_order = true;
  CHECK(rafb_fuse(low, high, swapped).to_vector() == add(mul(sa, low), mul(ca, high)).to_vector());

  zero_attention(p.ca);
  zero_attention(p.sa);
  auto z = rafb_fuse(low, high, p);
  for (std::size_t i = 0; i < z.vec().size(); ++i) CHECK(z.vec()[i] == 0.5 * low.vec()[i] + 0.5 * high.vec()[i]);

  Bench<float> big(14);
  auto pf = RafbParams<float>::create(big.b.scope("rafb"), 512, 16);
  CHECK(rafb_fuse(oracle::random_tensor<float>({1, 512, 16, 16}, 1), oracle::random_tensor<float>({1, 512, 16, 16}, 2),
                  pf)
            .shape() == Shape{1, 512, 16, 16});
  CHECK_THROWS_AS(rafb_fuse(low, oracle::random_tensor<double>({2, 4, 6, 6}, 3), p), DimensionError);
}

TEST_CASE("global_context") {
  Bench<double> bench(15);
  auto p = GlobalContextParams<double>::create(bench.b.scope("gc"), 3, 2);
  randomize(bench.store, 16);
  auto y = global_context(TensorD::full({1, 3, 4, 4}, 2.0), p);
  CHECK(y.shape() == Shape{1, 2, 1, 1});
  for (int o = 0; o < 2; ++o) {
    double expect = p.conv.bias.vec()[o];
    for (int c = 0; c < 3; ++c) expect += 2.0 * p.conv.weight.vec()[o * 3 + c];
    CHECK(y.vec()[o] == doctest::Approx(expect).epsilon(1e-14));
  }
  auto x = oracle::random_tensor<double>({2, 3, 5, 3}, 17);
  CHECK(global_context(x, p).to_vector() == nn::conv2d(nn::global_avg_pool(x), p.conv.weight, p.conv.bias, 1, 0).to_vector());
}

TEST_CASE("fused block gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Bench<double> bench(seed);
    auto ca = AttentionParams<double>::create(bench.b.scope("ca"), 6, 6, 2);
    auto sa = AttentionParams<double>::create(bench.b.scope("sa"), 6, 1, 2);
    auto r = RrbParams<double>::create(bench.b.scope("rrb"), 3, 4);
    auto cab = CabParams<double>::create(bench.b.scope("cab"), 4, 2);
    auto mafb = MafbParams<double>::create(bench.b.scope("mafb"), 3, 2, 4, 2);
    auto rafb = RafbParams<double>::create(bench.b.scope("rafb"), 4, 2);
    auto gc = GlobalContextParams<double>::create(bench.b.scope("gc"), 6, 4);
    randomize(bench.store, seed + 100);

    auto x6 = oracle::random_tensor<double>({2, 6, 4, 4}, seed + 1);
    auto x3 = oracle::random_tensor<double>({2, 3, 4, 4}, seed + 2);
    auto x2 = oracle::random_tensor<double>({2, 2, 4, 4}, seed + 3);
    auto lo = oracle::random_tensor<double>({2, 4, 4, 4}, seed + 4);
    auto hi = oracle::random_tensor<double>({2, 4, 4, 4}, seed + 5);

    std::vector<std::pair<std::string, TensorD>> params;
    for (const auto& e : bench.store.entries()) {
      if (nn::is_trainable(e.kind)) params.emplace_back(e.name, e.tensor);
    }
    auto with = [&](std::vector<std::pair<std::string, TensorD>> extra, const std::string& prefix) {
      for (const auto& p : params) {
        if (p.first.rfind(prefix, 0) == 0) extra.push_back(p);
      }
      return extra;
    };
    auto check = [&](const char* name, auto fn, std::vector<std::pair<std::string, TensorD>> inputs) {
      auto res = check_gradients<double>(fn, inputs, 1e-5);
      INFO(std::string(name) << " worst " << res.worst_input << "[" << res.worst_index << "]");
      CHECK(res.max_relative_error < 1e-6);
    };
    check("ca", [&] { return projected(channel_attention(x6, ca), seed); }, with({{"x", x6}}, "ca."));
    check("sa", [&] { return projected(spatial_attention(x6, sa), seed); }, with({{"x", x6}}, "sa."));
    check("rrb", [&] { return projected(rrb(x3, r, NormMode::kTrain), seed); }, with({{"x", x3}}, "rrb."));
    check("cab", [&] { return projected(cab_fuse(lo, hi, cab), seed); }, with({{"lo", lo}, {"hi", hi}}, "cab."));
    check("mafb", [&] { return projected(mafb_fuse(x3, x2, mafb, NormMode::kTrain), seed); },
          with({{"m", x3}, {"a", x2}}, "mafb."));
    check("rafb", [&] { return projected(rafb_fuse(lo, hi, rafb), seed); }, with({{"lo", lo}, {"hi", hi}}, "rafb."));
    check("gc", [&] { return projected(global_context(x6, gc), seed); }, with({{"x", x6}}, "gc."));
  }
}

TEST_CASE("backbone presets") {
  for (auto kind : {BackboneKind::kTiny, BackboneKind::kResNet18, BackboneKind::kResNet34, BackboneKind::kResNet50}) {
    auto c = BackboneConfig::preset(kind, 3);
    CHECK(c.violations("b").empty());
    CHECK(parse_backbone_kind(to_string(kind)) == kind);
  }
  auto bad = BackboneConfig::preset(BackboneKind::kTiny, 0);
  bad.widths = {32, 16, 64, 128};
  CHECK(bad.violations("b").size() == 2);
  CHECK_THROWS_AS(parse_backbone_kind("vgg"), ValidationError);
}

TEST_CASE("mpe_forward stride contract") {
  auto model = AfNetModel<float>::build(tiny(VariantTag::kMPVN_RM), 1);
  auto enc = model.mpe_forward(oracle::random_tensor<float>({1, 3, 64, 64}, 1),
                               oracle::random_tensor<float>({1, 2, 64, 64}, 2), NormMode::kTrain);
  const int widths[4] = {16, 32, 64, 128};
  for (int s = 0; s < 4; ++s) {
    const std::int64_t e = 16 >> s;
    CHECK(enc.main[s].shape() == Shape{1, widths[s], e, e});
    CHECK(enc.aux->at(s).shape() == Shape{1, widths[s], e, e});
  }
  CHECK_THROWS_AS(model.mpe_forward(oracle::random_tensor<float>({1, 3, 64, 64}, 1), TensorF{}, NormMode::kTrain),
                  ContractError);
  CHECK_THROWS_AS(model.mpe_forward(oracle::random_tensor<float>({1, 3, 48, 48}, 1),
                                    oracle::random_tensor<float>({1, 2, 48, 48}, 2), NormMode::kTrain),
                  GeometryError);

  auto dfn = AfNetModel<float>::build(tiny(VariantTag::kDFN), 1);
  auto single = dfn.mpe_forward(oracle::random_tensor<float>({1, 3, 64, 64}, 1), TensorF{}, NormMode::kTrain);
  CHECK_FALSE(single.aux.has_value());
  CHECK_THROWS_AS(dfn.mpe_forward(oracle::random_tensor<float>({1, 3, 64, 64}, 1),
                                  oracle::random_tensor<float>({1, 2, 64, 64}, 2), NormMode::kTrain),
                  ContractError);
}

TEST_CASE("encoder branches do not share parameters") {
  auto v = tiny(VariantTag::kMPVN);
  v.aux.in_channels = 3;
  v.aux_channels = 3;
  auto model = AfNetModel<double>::build(v, 3);
  auto x = oracle::random_tensor<double>({1, 3, 32, 32}, 4);
  auto enc = model.mpe_forward(x, x, NormMode::kEval);
  for (int s = 0; s < 4; ++s) CHECK(enc.main[s].vec() != enc.aux->at(s).to_vector());
  for (const auto& e : model.params().entries()) {
    if (e.name.rfind("main.", 0) != 0) continue;
    const auto twin = "aux." + e.name.substr(5);
    REQUIRE(model.params().contains(twin));
    CHECK(model.params().get(twin).tensor.node() != e.tensor.node());
  }
}

TEST_CASE("all six variants build and forward") {
  for (auto tag : all_variant_tags()) {
    CAPTURE(to_string(tag));
    auto model = AfNetModel<float>::build(tiny(tag, 32), 7);
    const auto aux = tag == VariantTag::kDFN ? TensorF{} : oracle::random_tensor<float>({2, 2, 64, 64}, 2);
    auto logits = model.forward(oracle::random_tensor<float>({2, 3, 64, 64}, 1), aux, NormMode::kTrain);
    REQUIRE(logits.size() == 4);
    for (const auto& l : logits) CHECK(l.shape() == Shape{2, 6, 64, 64});
    CHECK(parse_variant_tag(to_string(tag)) == tag);
  }
}

TEST_CASE("stacked variant accepts pre-stacked or split inputs") {
  auto model = AfNetModel<double>::build(tiny(VariantTag::kMDFN), 2);
  auto img = oracle::random_tensor<double>({1, 3, 32, 32}, 1);
  auto aux = oracle::random_tensor<double>({1, 2, 32, 32}, 2);
  auto a = model.forward(img, aux, NormMode::kEval);
  auto b = model.forward(concat_channels<double>({img, aux}), TensorD{}, NormMode::kEval);
  for (int i = 0; i < 4; ++i) CHECK(a[i].vec() == b[i].vec());
}

TEST_CASE("parameter counts grow with the multipath encoder and fusion blocks") {
  auto dfn = AfNetModel<float>::build(tiny(VariantTag::kDFN), 1).params().parameter_count();
  auto mpvn = AfNetModel<float>::build(tiny(VariantTag::kMPVN), 1).params().parameter_count();
  auto rm = AfNetModel<float>::build(tiny(VariantTag::kMPVN_RM), 1).params().parameter_count();
  CHECK(dfn < mpvn);
  CHECK(mpvn < rm);
}

TEST_CASE("build_model determinism and registry audit") {
  auto a = AfNetModel<float>::build(tiny(VariantTag::kMPVN_RM), 42);
  auto b = AfNetModel<float>::build(tiny(VariantTag::kMPVN_RM), 42);
  auto c = AfNetModel<float>::build(tiny(VariantTag::kMPVN_RM), 43);
  CHECK(a.params().equals(b.params()));
  CHECK_FALSE(a.params().equals(c.params()));

  std::set<std::string> names;
  std::set<const void*> nodes;
  for (const auto& e : a.params().entries()) {
    CHECK(names.insert(e.name).second);
    CHECK(nodes.insert(e.tensor.node().get()).second);
    if (e.kind == nn::ParamKind::kNormScale)
      for (float v : e.tensor.data()) CHECK(v == 1.0f);
    if (e.kind == nn::ParamKind::kNormShift)
      for (float v : e.tensor.data()) CHECK(v == 0.0f);
  }
  CHECK(names.count("fuse.s8.mafb.ca.conv1.weight"));
  CHECK(names.count("dec.s16.rafb.sa.conv2.bias"));
  CHECK(names.count("head.s4.weight"));
}

TEST_CASE("variant validation lists every violation") {
  auto v = tiny(VariantTag::kMPVN_RM);
  v.encoder_fusion = EncoderFusion::kSum;
  v.decoder_fusion = DecoderFusion::kCab;
  v.num_classes = 1;
  CHECK(v.violations().size() == 3);
  try {
    AfNetModel<float>::build(v, 1);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("MAFB") != std::string::npos);
    CHECK(msg.find("RAFB") != std::string::npos);
    CHECK(msg.find("num_classes") != std::string::npos);
  }
  auto dfn = tiny(VariantTag::kDFN);
  dfn.multipath = true;
  CHECK_FALSE(dfn.violations().empty());
  CHECK_THROWS_AS(parse_variant_tag("MPVN-X"), ValidationError);
}

TEST_CASE("removing MAFB from MPVN-RM wires exactly like MPVN-R") {
  auto rm = AfNetModel<double>::build(tiny(VariantTag::kMPVN_RM), 5);
  randomize(rm.params(), 6);
  auto stripped = AfNetModel<double>::build(without_mafb(rm.variant()), 99);
  auto r = AfNetModel<double>::build(tiny(VariantTag::kMPVN_R), 77);
  CHECK(stripped.variant().tag == VariantTag::kMPVN_R);

  // Shared components carry the same names. Only the decoder entry convs
  // differ in shape, since sum fusion keeps the backbone width.
  std::set<std::string> skipped;
  for (const auto& e : r.params().entries()) {
    if (!rm.params().contains(e.name) || rm.params().get(e.name).tensor.shape() != e.tensor.shape()) {
      skipped.insert(e.name);
    }
  }
  CHECK(skipped == std::set<std::string>{"dec.gc.conv.weight", "dec.s8.rrb_in.unify.weight",
                                         "dec.s16.rrb_in.unify.weight", "dec.s32.rrb_in.unify.weight"});
  CHECK(r.params().copy_matching_from(rm.params()) == r.params().size() - skipped.size());
  for (const auto& e : rm.params().entries()) {
    if (!r.params().contains(e.name)) CHECK(e.name.find(".mafb.") != std::string::npos);
  }
  CHECK(stripped.params().copy_matching_from(rm.params()) == r.params().size() - skipped.size());
  CHECK(stripped.params().copy_matching_from(r.params()) == r.params().size());
  CHECK(stripped.params().equals(r.params()));

  auto img = oracle::random_tensor<double>({2, 3, 32, 32}, 1);
  auto aux = oracle::random_tensor<double>({2, 2, 32, 32}, 2);
  auto a = stripped.forward(img, aux, NormMode::kEval);
  auto b = r.forward(img, aux, NormMode::kEval);
  for (int i = 0; i < 4; ++i) CHECK(a[i].vec() == b[i].vec());
}

TEST_CASE("feature sink records attention maps") {
  auto model = AfNetModel<float>::build(tiny(VariantTag::kMPVN_RM), 1);
  FeatureSink<float> sink;
  model.forward(oracle::random_tensor<float>({1, 3, 32, 32}, 1), oracle::random_tensor<float>({1, 2, 32, 32}, 2),
                NormMode::kEval, &sink);
  std::set<std::string> names;
  for (const auto& [n, t] : sink.maps) names.insert(n);
  CHECK(names.count("fuse.s32.mafb.sa"));
  CHECK(names.count("fuse.s4.mafb.ca"));
  CHECK(names.count("dec.s4.rafb.sa"));
  CHECK(names.count("dec.s16.rafb.ca"));
  CHECK(names.size() == 4 * 2 + 3 * 2);
}

TEST_CASE("full tiny model gradient check") {
  auto model = AfNetModel<double>::build(tiny(VariantTag::kMPVN_RM, 8), 3);
  auto img = oracle::random_tensor<double>({2, 3, 32, 32}, 1);
  auto aux = oracle::random_tensor<double>({2, 2, 32, 32}, 2);
  std::vector<std::pair<std::string, TensorD>> params;
  for (const auto& e : model.params().entries()) {
    if (nn::is_trainable(e.kind)) params.emplace_back(e.name, e.tensor);
  }
  auto loss = [&] {
    auto logits = model.forward(img, aux, NormMode::kTrain);
    TensorD total;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      auto p = projected(logits[i], 10 + i);
      total = total.defined() ? add(total, p) : p;
    }
    return total;
  };
  auto res = check_gradients<double>(loss, params, 1e-5, 1, 4);
  INFO("worst " << res.worst_input << "[" << res.worst_index << "]");
  CHECK(res.elements_checked == static_cast<std::int64_t>(params.size()));
  CHECK(res.max_relative_error < 1e-3);
}
