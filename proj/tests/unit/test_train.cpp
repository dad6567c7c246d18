#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "afnet/core/gradcheck.hpp"
#include "afnet/core/ops.hpp"
#include "afnet/train/loss.hpp"
#include "afnet/train/trainer.hpp"
#include "support/oracles.hpp"

using namespace afnet;
using namespace afnet::train;

namespace {

LabelMap random_labels(std::int64_t n, std::int64_t h, std::int64_t w, int k, std::uint64_t seed,
                       double ignore_share = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cls(0, k - 1);
  std::bernoulli_distribution ignore(ignore_share);
  LabelMap l(n, h, w);
  for (auto& v : l.values) v = ignore(rng) ? kIgnoreLabel : static_cast<std::uint8_t>(cls(rng));
  return l;
}

double brute_force_ce(const TensorD& logits, const LabelMap& labels) {
  const auto n = logits.dim(0), k = logits.dim(1), h = logits.dim(2), w = logits.dim(3);
  double total = 0;
  int count = 0;
  for (int b = 0; b < n; ++b)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int label = labels.values[(b * h + y) * w + x];
        if (label == kIgnoreLabel) continue;
        std::vector<double> z;
        for (int c = 0; c < k; ++c) z.push_back(logits.at({b, c, y, x}));
        total -= std::log(oracle::softmax_pixel(z)[label]);
        ++count;
      }
  return total / count;
}

Sample make_sample(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  Sample s;
  s.h = h;
  s.w = w;
  s.image_channels = 3;
  s.aux_channels = 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1, 1);
  s.image.resize(3 * h * w);
  s.aux.resize(2 * h * w);
  s.label.resize(h * w);
  for (auto& v : s.image) v = u(rng);
  for (auto& v : s.aux) v = u(rng);
  for (auto& v : s.label) v = static_cast<std::uint8_t>(rng() % 6);
  return s;
}

arch::ModelVariant tiny(arch::VariantTag tag = arch::VariantTag::kMPVN_RM) {
  return arch::ModelVariant::from_tag(tag, arch::BackboneKind::kTiny, arch::BackboneKind::kTiny, 8, 6);
}

}  // namespace

TEST_CASE("cross entropy examples") {
  auto uniform = TensorD::zeros({1, 2, 3, 3});
  CHECK(cross_entropy_loss(uniform, LabelMap(1, 3, 3, 1)).item() == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  std::vector<double> confident(2 * 4, -20.0);
  for (int p = 0; p < 4; ++p) confident[4 + p] = 20.0;
  CHECK(cross_entropy_loss(TensorD::from_data({1, 2, 2, 2}, confident), LabelMap(1, 2, 2, 1)).item() < 1e-3);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto logits = oracle::random_tensor<double>({2, 6, 4, 5}, seed, -4, 4);
    auto labels = random_labels(2, 4, 5, 6, seed + 1, 0.2);
    const double loss = cross_entropy_loss(logits, labels).item();
    CHECK(loss >= 0.0);
    CHECK(std::abs(loss - brute_force_ce(logits, labels)) <= 1e-6);
  }
}

TEST_CASE("cross entropy errors") {
  auto logits = TensorD::zeros({1, 3, 2, 2});
  LabelMap bad(1, 2, 2, 0);
  bad.values[3] = 3;
  CHECK_THROWS_AS(cross_entropy_loss(logits, bad), ValidationError);
  CHECK_THROWS_AS(cross_entropy_loss(logits, LabelMap(1, 2, 2, kIgnoreLabel)), DegenerateInputError);
  CHECK_THROWS_AS(cross_entropy_loss(logits, LabelMap(1, 2, 2, kIgnoreLabel), std::nullopt), ValidationError);
  CHECK_THROWS_AS(cross_entropy_loss(logits, LabelMap(1, 2, 3, 0)), DimensionError);
}

TEST_CASE("cross entropy gradient") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto logits = oracle::random_tensor<double>({2, 4, 3, 3}, seed, -3, 3);
    auto labels = random_labels(2, 3, 3, 4, seed + 9, 0.25);
    auto res = check_gradients<double>([&] { return cross_entropy_loss(logits, labels); }, {{"logits", logits}}, 1e-5);
    CHECK(res.max_relative_error < 1e-6);
    // Ignored pixels receive no gradient.
    for (int c = 0; c < 4; ++c)
      for (std::size_t p = 0; p < 9; ++p)
        if (labels.values[p] == kIgnoreLabel) CHECK(logits.grad()[c * 9 + p] == 0.0);
  }
}

TEST_CASE("deep supervision loss") {
  auto a = oracle::random_tensor<double>({1, 3, 4, 4}, 1);
  auto labels = random_labels(1, 4, 4, 3, 2);
  const double single = cross_entropy_loss(a, labels).item();
  CHECK(deep_supervision_loss<double>({a}, labels).item() == single);
  CHECK(deep_supervision_loss<double>({a, a, a, a}, labels).item() == doctest::Approx(4 * single).epsilon(1e-15));
  CHECK_THROWS_AS(deep_supervision_loss<double>({}, labels), ContractError);
}

TEST_CASE("deep supervision reaches every stage head") {
  auto model = arch::AfNetModel<double>::build(tiny(), 4);
  auto img = oracle::random_tensor<double>({2, 3, 32, 32}, 1);
  auto aux = oracle::random_tensor<double>({2, 2, 32, 32}, 2);
  backward(deep_supervision_loss(model.forward(img, aux, nn::NormMode::kTrain), random_labels(2, 32, 32, 6, 3)));
  for (const char* head : {"head.s32.weight", "head.s16.weight", "head.s8.weight", "head.s4.weight"}) {
    const auto& t = model.params().get(head).tensor;
    REQUIRE(t.has_grad());
    double norm = 0;
    for (double g : t.grad()) norm += g * g;
    CHECK(norm > 0);
  }
  for (const auto& e : model.params().entries()) {
    if (nn::is_trainable(e.kind)) CHECK(e.tensor.has_grad());
  }
}

TEST_CASE("adam closed-form first step") {
  nn::ParamStore<double> store;
  auto p = store.add("w", TensorD::from_data({1}, {0.5}), nn::ParamKind::kBias);
  backward(sum_all(p));  // grad 1
  AdamState st;
  st.config.weight_decay = 0;
  adam_step(store, st, 1e-3);
  CHECK(st.step == 1);
  CHECK(p.vec()[0] - 0.5 == doctest::Approx(-1e-3).epsilon(1e-7));
}

TEST_CASE("adam fixed points") {
  nn::ParamStore<double> store;
  auto w = store.add("conv.weight", oracle::random_tensor<double>({2, 2, 1, 1}, 1), nn::ParamKind::kConvWeight);
  auto b = store.add("conv.bias", oracle::random_tensor<double>({2}, 2), nn::ParamKind::kBias);
  auto rm = store.add("bn.running_mean", TensorD::zeros({2}), nn::ParamKind::kRunningMean);
  const auto w0 = w.vec(), b0 = b.vec();

  SUBCASE("zero gradient without decay") {
    backward(scale(add(sum_all(w), sum_all(b)), 0.0));
    AdamState st;
    st.config.weight_decay = 0;
    adam_step(store, st, 1e-3);
    CHECK(w.vec() == w0);
    CHECK(b.vec() == b0);
  }
  SUBCASE("lr 0 is the identity") {
    backward(add(sum_all(mul(w, w)), sum_all(b)));
    AdamState st;
    adam_step(store, st, 0.0);
    CHECK(w.vec() == w0);
    CHECK(b.vec() == b0);
  }
  SUBCASE("weight decay touches conv weights only") {
    backward(scale(add(sum_all(w), sum_all(b)), 0.0));
    AdamState st;
    st.config.weight_decay = 0.5;
    adam_step(store, st, 1e-2);
    CHECK(w.vec() != w0);
    CHECK(b.vec() == b0);
    CHECK(rm.vec() == std::vector<double>{0, 0});
    for (double v : st.v.at("conv.weight")) CHECK(v >= 0);
    CHECK_FALSE(st.m.count("bn.running_mean"));
  }
  SUBCASE("missing gradients") {
    AdamState st;
    CHECK_THROWS_AS(adam_step(store, st, 1e-3), ContractError);
  }
}

TEST_CASE("adam descends a quadratic") {
  nn::ParamStore<double> store;
  auto x = store.add("x", TensorD::from_data({3}, {1.0, -2.0, 0.5}), nn::ParamKind::kBias);
  auto f = [&] { return sum_all(mul(x, x)); };
  const double start = f().item();
  AdamState st;
  for (int i = 0; i < 2; ++i) {
    backward(f());
    adam_step(store, st, 0.1);
  }
  CHECK(f().item() < start);
}

TEST_CASE("adam state records round trip") {
  AdamState st;
  st.step = 7;
  st.m["a"] = {0.25, -1};
  st.v["a"] = {0.5, 2};
  AdamState back;
  adam_from_records(back, adam_to_records(st));
  CHECK(back.step == 7);
  CHECK(back.m == st.m);
  CHECK(back.v == st.v);
}

TEST_CASE("learning-rate schedule") {
  LrSchedule s;
  s.iters_per_epoch = 8;
  CHECK(lr_schedule(0, 0, s) == 1e-5);
  CHECK(lr_schedule(100, 0, s) == 1e-3);
  CHECK(lr_schedule(299, 7, s) == 1e-3);
  CHECK(lr_schedule(300, 0, s) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(lr_schedule(350, 0, s) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(lr_schedule(500, 0, s) == doctest::Approx(1e-5).epsilon(1e-15));

  // Continuity at the junction: the warmup curve tends to lr1.
  const double before = lr_schedule(99, 7, s);
  const double next_step = s.lr0 * std::pow(s.lr1 / s.lr0, 800.0 / 800.0);
  CHECK(std::abs(next_step - lr_schedule(100, 0, s)) / 1e-3 <= 1e-12);
  CHECK(before < 1e-3);
  CHECK(before > 0.99 * 1e-3);

  double prev = lr_schedule(0, 0, s);
  for (int e = 0; e < 100; ++e)
    for (int i = 0; i < 8; ++i) {
      const double lr = lr_schedule(e, i, s);
      CHECK(lr >= prev);
      prev = lr;
    }
  prev = lr_schedule(100, 0, s);
  for (int e = 100; e < 1000; ++e) {
    const double lr = lr_schedule(e, 0, s);
    CHECK(lr <= prev);
    prev = lr;
  }

  LrSchedule bad;
  bad.step_factor = 1.0;
  bad.lr0 = 0;
  CHECK(bad.violations().size() == 2);
}

TEST_CASE("augmentation") {
  const auto s = make_sample(6, 6, 1);
  std::mt19937_64 rng(0);
  CHECK(augment(s, rng, AugmentConfig{}) == s);
  AugmentConfig full_crop;
  full_crop.crop = 6;
  CHECK(augment(s, rng, full_crop) == s);
  CHECK(hflip(hflip(s)) == s);
  CHECK(vflip(vflip(s)) == s);
  CHECK(rotate90(rotate90(s, 1), 3) == s);
  CHECK(rotate90(s, 2) == hflip(vflip(s)));

  AugmentConfig too_big;
  too_big.crop = 7;
  CHECK_THROWS_AS(augment(s, rng, too_big), ContractError);
}

TEST_CASE("augmentation moves every raster together") {
  // Encode the pixel index in every channel so any misalignment shows.
  Sample s;
  s.h = s.w = 5;
  s.image_channels = 1;
  s.aux_channels = 1;
  for (int i = 0; i < 25; ++i) {
    s.image.push_back(static_cast<float>(i));
    s.aux.push_back(static_cast<float>(-i));
    s.label.push_back(static_cast<std::uint8_t>(i));
  }
  AugmentConfig cfg{true, true, true, 3};
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto a = augment(s, rng, cfg);
    REQUIRE(a.label.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(a.image[i] == a.label[i]);
      CHECK(a.aux[i] == -static_cast<float>(a.label[i]));
    }
  }
}

TEST_CASE("flips and rotations preserve the label histogram") {
  AugmentConfig cfg{true, true, true, 0};
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = make_sample(8, 8, seed);
    auto a = augment(s, rng, cfg);
    std::map<int, int> h0, h1;
    for (auto v : s.label) ++h0[v];
    for (auto v : a.label) ++h1[v];
    CHECK(h0 == h1);
  }
}

TEST_CASE("crop offsets cover the inclusive range") {
  // 10 -> 8 leaves offsets {0, 1, 2} per axis: 9 placements.
  Sample s;
  s.h = s.w = 10;
  s.image_channels = 1;
  for (int i = 0; i < 100; ++i) {
    s.image.push_back(static_cast<float>(i));
    s.label.push_back(0);
  }
  AugmentConfig cfg;
  cfg.crop = 8;
  std::mt19937_64 rng(1);
  std::set<float> corners;
  for (int t = 0; t < 500; ++t) corners.insert(augment(s, rng, cfg).image[0]);
  CHECK(corners == std::set<float>{0, 1, 2, 10, 11, 12, 20, 21, 22});
}

TEST_CASE("train_loop accounting, determinism and logging") {
  const auto dir = std::filesystem::temp_directory_path() / "afnet_train_test";
  std::filesystem::remove_all(dir);
  std::vector<Sample> data{make_sample(32, 32, 1), make_sample(32, 32, 2)};

  TrainOptions opt;
  opt.epochs = 1;
  opt.batch_size = 2;
  opt.seed = 3;
  opt.schedule.warmup_epochs = 1;
  auto m1 = arch::AfNetModel<float>::build(tiny(), 1);
  AdamState s1;
  auto r1 = train_loop(m1, s1, data, nullptr, opt);
  REQUIRE(r1.history.size() == 1);
  CHECK(r1.history[0].steps == 1);
  CHECK(s1.step == 1);

  opt.epochs = 3;
  opt.augment = AugmentConfig{true, true, true, 0};
  opt.checkpoint_dir = dir / "ckpt";
  opt.log_path = dir / "log.csv";
  auto run = [&](std::uint64_t seed) {
    auto m = arch::AfNetModel<float>::build(tiny(), 1);
    AdamState st;
    auto o = opt;
    o.seed = seed;
    std::vector<double> losses;
    for (const auto& r : train_loop(m, st, data, &data, o).history) losses.push_back(r.train_loss);
    return losses;
  };
  const auto a = run(3);
  CHECK(a == run(3));
  CHECK(a != run(4));

  std::ifstream log(dir / "log.csv");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    ++lines;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(lines == 9);
  CHECK(std::filesystem::exists(dir / "ckpt" / "last.afck"));
  CHECK(std::filesystem::exists(dir / "ckpt" / "best.afck"));
  CHECK(format_log_line({3, 1e-3, 0.5, std::nullopt, std::nullopt, 1}) == "3,0.001,0.5,,");
  std::filesystem::remove_all(dir);
}

TEST_CASE("resuming continues the optimizer step counter") {
  const auto dir = std::filesystem::temp_directory_path() / "afnet_resume_test";
  std::filesystem::remove_all(dir);
  std::vector<Sample> data{make_sample(32, 32, 1), make_sample(32, 32, 2), make_sample(32, 32, 3),
                           make_sample(32, 32, 4), make_sample(32, 32, 5)};
  TrainOptions opt;
  opt.epochs = 2;
  opt.batch_size = 2;
  opt.checkpoint_dir = dir;
  auto m = arch::AfNetModel<float>::build(tiny(), 1);
  AdamState st;
  train_loop(m, st, data, nullptr, opt);
  CHECK(st.step == 4);

  auto fresh = arch::AfNetModel<float>::build(tiny(), 2);
  AdamState resumed;
  const int next = load_training_checkpoint(dir / "last.afck", fresh, &resumed);
  CHECK(next == 2);
  CHECK(resumed.step == 4);
  CHECK(fresh.params().equals(m.params()));
  opt.start_epoch = next;
  opt.epochs = 1;
  auto r = train_loop(fresh, resumed, data, nullptr, opt);
  CHECK(r.history.front().epoch == 2);
  CHECK(resumed.step == 6);

  // Same batches as an uninterrupted three-epoch run; moments pass through f32
  // on disk, so agreement is close rather than exact.
  auto straight = arch::AfNetModel<float>::build(tiny(), 1);
  AdamState straight_state;
  TrainOptions whole = opt;
  whole.start_epoch = 0;
  whole.epochs = 3;
  whole.checkpoint_dir.clear();
  train_loop(straight, straight_state, data, nullptr, whole);
  double worst = 0.0;
  for (std::size_t i = 0; i < straight.params().size(); ++i) {
    const auto& a = straight.params().entries()[i].tensor;
    const auto& b = fresh.params().entries()[i].tensor;
    for (std::size_t k = 0; k < a.data().size(); ++k)
      worst = std::max(worst, static_cast<double>(std::abs(a.data()[k] - b.data()[k])));
  }
  CHECK(worst < 1e-5);

  auto other = arch::AfNetModel<float>::build(tiny(arch::VariantTag::kMPVN_R), 1);
  try {
    load_training_checkpoint(dir / "last.afck", other, nullptr);
    FAIL("expected a variant mismatch");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("variant mismatch") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("one train step usually lowers the loss on a fixed batch") {
  // 64x64 keeps more than two values per channel in the stride-32 norm.
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto model = arch::AfNetModel<float>::build(tiny(), seed);
    std::vector<Sample> data{make_sample(64, 64, seed), make_sample(64, 64, seed + 100)};
    auto batch = make_batch<float>({&data[0], &data[1]});
    auto loss = [&] {
      return deep_supervision_loss(model.forward(batch.image, batch.aux, nn::NormMode::kTrain), batch.labels);
    };
    auto before = loss();
    backward(before);
    AdamState st;
    LrSchedule schedule;
    adam_step(model.params(), st, lr_schedule(0, 0, schedule));
    NoGradGuard guard;
    improved += loss().item() < before.item();
  }
  CHECK(improved >= 19);
}
