#include "doctest.h"

#include <random>
#include <sstream>

#include "afnet/cli/app.hpp"
#include "afnet/cli/commands.hpp"
#include "afnet/cli/config.hpp"
#include "afnet/core/errors.hpp"
#include "afnet/core/ops.hpp"
#include "afnet/verify/grad_suite.hpp"
#include "support/fixtures.hpp"

using namespace afnet;
using namespace afnet::cli;
namespace fs = std::filesystem;

namespace {

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::string validation_message(const std::string& text, const Overrides& o = {}) {
  try {
    parse_config(text, o);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "afnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("default configuration echoes the training recipe") {
  const RunConfig c = parse_config("");
  CHECK(c.train.lr0 == 1e-5);
  CHECK(c.train.lr1 == 1e-3);
  CHECK(c.train.warmup_epochs == 100);
  CHECK(c.train.step_interval == 200);
  CHECK(c.train.step_factor == 0.1);
  CHECK(c.train.weight_decay == 1e-4);
  CHECK(c.train.batch_size == 2);
  CHECK(c.data.crop == 640);
  CHECK(c.infer.tile == 1920);
  CHECK(c.infer.overlap == 960);
  CHECK(c.model.decoder_width == 512);
  CHECK(c.model.main_backbone == arch::BackboneKind::kResNet50);
  CHECK(c.model.aux_backbone == arch::BackboneKind::kResNet18);
  CHECK(c.model.variant == arch::VariantTag::kMPVN_RM);
  CHECK(c.eval.erode == 3);
  CHECK(c == RunConfig{});
  const auto text = serialize_config(c);
  CHECK(text.find("lr0 = 1e-05\n") != std::string::npos);
  CHECK(text.find("weight_decay = 1e-04\n") != std::string::npos);
  CHECK(text.find("variant = MPVN-RM\n") != std::string::npos);
}

TEST_CASE("config round trip is a fixed point") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& tags = arch::all_variant_tags();
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    c.model.variant = tags[trial % tags.size()];
    c.model.main_backbone = trial % 2 ? arch::BackboneKind::kTiny : arch::BackboneKind::kResNet34;
    c.model.decoder_width = 8 + trial;
    c.model.rafb_caption_order = trial % 3 == 0;
    c.model.upsample = trial % 4 == 0 ? nn::UpsampleMapping::kAlignCorners : nn::UpsampleMapping::kHalfPixel;
    c.data.manifest = "data dir/tiles_" + std::to_string(trial) + ".txt";
    c.data.slice = 64 * (1 + trial % 5);
    c.data.overlap = c.data.slice / 2;
    c.data.crop = 32 * (1 + trial % 2);
    c.data.val_tiles = {"area" + std::to_string(trial), "area_x"};
    c.train.lr0 = 1e-7 + u(rng) * 1e-4;
    c.train.lr1 = 1e-4 + u(rng) * 1e-2;
    c.train.step_factor = 0.01 + 0.9 * u(rng);
    c.train.beta1 = 0.5 + 0.4 * u(rng);
    c.train.eps = u(rng) * 1e-6 + 1e-12;
    c.train.weight_decay = u(rng) * 1e-3;
    c.train.seed = rng();
    c.infer.tta = trial % 3 == 0 ? "none" : (trial % 3 == 1 ? "flips" : "full");
    c.infer.stitch = trial % 2 ? geo::StitchMode::kAverage : geo::StitchMode::kCrop;
    c.eval.mean_classes = {trial % 6};
    const auto once = serialize_config(c);
    const auto parsed = parse_config(once);
    CHECK(parsed == c);
    CHECK(serialize_config(parsed) == once);
  }
}

TEST_CASE("config parsing trims, accepts comments and applies overrides") {
  const auto c = parse_config(
      "; comment\n[model]\nvariant = MPVN\n\n[train]\n  epochs =  7 \n[data]\nval_tiles = a, b\n"
      "palette = imp_surf:255,255,255; building:0,0,255; low_veg:0,255,255; tree:0,255,0; car:255,255,0; "
      "clutter:255,0,0\n",
      {{"train.seed", "9"}, {"infer.tta", "none"}, {"model.variant", "DFN"}});
  CHECK(c.model.variant == arch::VariantTag::kDFN);
  CHECK(c.train.epochs == 7);
  CHECK(c.train.seed == 9);
  CHECK(c.infer.tta == "none");
  CHECK(c.data.val_tiles == std::vector<std::string>{"a", "b"});
  CHECK(c.data.palette == RunConfig{}.data.palette);
}

TEST_CASE("config errors are listed all at once") {
  const auto msg = validation_message(
      "[model]\nclasses = six\ncolour = red\n[train]\nlr0 = -1\nbatch_size = 0\n[bogus]\nx = 1\n[eval]\nerode = -2\n");
  INFO(msg);
  CHECK(msg.find("unknown key 'model.colour'") != std::string::npos);
  CHECK(msg.find("model.classes: 'six' is not an integer") != std::string::npos);
  CHECK(msg.find("unknown section [bogus]") != std::string::npos);
  CHECK(msg.find("lr0 must be > 0") != std::string::npos);
  CHECK(msg.find("train.batch_size must be >= 1") != std::string::npos);
  CHECK(msg.find("eval.erode must be >= 0") != std::string::npos);
  CHECK(msg.find("(6 problems)") != std::string::npos);
  CHECK(count_of(msg, "\n  - ") == 6);

  CHECK(validation_message("[infer]\ntta = sideways\n").find("infer.tta") != std::string::npos);
  CHECK(validation_message("[data]\nslice = 100\n").find("data.overlap must be half") != std::string::npos);
  CHECK(validation_message("[model]\nclasses = 5\n").find("palette has 6 colors") != std::string::npos);
  CHECK(validation_message("[train]\nseed = -3\n").find("train.seed") != std::string::npos);
  CHECK(validation_message("[train]\nhflip = true\n").find("unknown key 'train.hflip'") != std::string::npos);
  CHECK(validation_message("", {{"data.nope", "1"}}).find("unknown override key 'data.nope'") != std::string::npos);
  CHECK(validation_message("toplevel = 1\n").find("outside any section") != std::string::npos);
  CHECK_THROWS_AS(parse_config("[model\nvariant = DFN\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[model]\nvariant = DFN\nvariant = MPVN\n"), ParseError);
}

TEST_CASE("command preflight runs before any compute") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  auto problems = c.violations(Command::kPrepare);
  CHECK(problems == std::vector<std::string>{"prepare needs data.manifest"});
  c.data.crop = 100;
  problems = c.violations(Command::kTrain);
  CHECK(std::find(problems.begin(), problems.end(), "train needs data.crop to be a multiple of 32") != problems.end());
  c.infer.tile = 48;
  c.infer.overlap = 24;
  problems = c.violations(Command::kInfer);
  CHECK(problems.size() == 2);  // manifest and tile
  CHECK_THROWS_AS(c.validate(Command::kInfer), ValidationError);
  c.eval.gt_dir = "gt";
  CHECK(c.violations(Command::kEval).empty());
}

TEST_CASE("model variant follows the configuration") {
  RunConfig c;
  c.model.variant = arch::VariantTag::kMPVN_M;
  c.model.main_backbone = arch::BackboneKind::kTiny;
  c.model.aux_backbone = arch::BackboneKind::kTiny;
  c.model.decoder_width = 24;
  c.model.rafb_caption_order = true;
  const auto v = c.model_variant();
  CHECK(v.tag == arch::VariantTag::kMPVN_M);
  CHECK(v.decoder_width == 24);
  CHECK(v.rafb_caption_order);
  CHECK(v.encoder_fusion == arch::EncoderFusion::kMafb);
  CHECK(v.decoder_fusion == arch::DecoderFusion::kCab);
}

TEST_CASE("eval: perfect predictions, swapped colors and boundary erosion") {
  fixtures::TempDir dir("eval");
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "pred");
  const auto pal = geo::Palette::standard();
  std::vector<geo::RasterImage> truths;
  for (int t = 0; t < 3; ++t) {
    auto tile = fixtures::make_tile(23 + t, 17, 40 + t);
    tile.classes.u8[0] = kIgnoreLabel;
    geo::write_raster(dir / "gt" / ("t" + std::to_string(t) + ".ppm"), geo::encode_labels(tile.classes, pal));
    truths.push_back(tile.classes);
  }
  RunConfig c;
  c.eval.gt_dir = dir / "gt";
  c.eval.pred_dir = dir / "pred";
  c.eval.report_dir = dir / "report";
  c.eval.erode = 0;
  std::ostringstream log;

  SUBCASE("perfect") {
    for (int t = 0; t < 3; ++t) fs::copy(dir / "gt" / ("t" + std::to_string(t) + ".ppm"), dir / "pred");
    const auto report = cmd_eval(c, log);
    CHECK(eval::overall_accuracy(report.aggregate) == 1.0);
    CHECK(report.tiles.size() == 3);
    CHECK(fixtures::read_bytes(dir / "report" / "report.txt").find("100.00") != std::string::npos);
    const auto rows = eval::parse_csv(fixtures::read_bytes(dir / "report" / "metrics.csv"));
    CHECK(rows.back().scope == "aggregate");
    CHECK(rows.back().oa == 1.0);
  }
  SUBCASE("swapping two class colors drops OA by their pixel share") {
    std::uint64_t counted = 0, swapped = 0;
    for (int t = 0; t < 3; ++t) {
      auto pred = truths[t];
      for (auto& v : pred.u8) {
        if (v == kIgnoreLabel) {
          v = 0;
          continue;
        }
        ++counted;
        if (v == 1 || v == 3) ++swapped;
        v = v == 1 ? 3 : (v == 3 ? 1 : v);
      }
      geo::write_raster(dir / "pred" / ("t" + std::to_string(t) + ".ppm"), geo::encode_labels(pred, pal));
    }
    const auto report = cmd_eval(c, log);
    CHECK(report.aggregate.total() == counted);
    CHECK(eval::overall_accuracy(report.aggregate) ==
          doctest::Approx(1.0 - static_cast<double>(swapped) / static_cast<double>(counted)).epsilon(1e-15));
  }
  SUBCASE("errors only at boundaries: eroded OA >= strict OA") {
    for (int t = 0; t < 3; ++t) {
      auto pred = truths[t];
      const auto mask = eval::boundary_ignore_mask(geo::to_label_map(truths[t]), 1);
      for (std::size_t i = 0; i < pred.u8.size(); ++i) {
        if (pred.u8[i] == kIgnoreLabel) pred.u8[i] = 0;
        if (mask[i]) pred.u8[i] = static_cast<std::uint8_t>((pred.u8[i] + 1) % 6);
      }
      geo::write_raster(dir / "pred" / ("t" + std::to_string(t) + ".pgm"), pred);
    }
    const double strict = eval::overall_accuracy(cmd_eval(c, log).aggregate);
    c.eval.erode = 1;
    const double eroded = eval::overall_accuracy(cmd_eval(c, log).aggregate);
    CHECK(strict < 1.0);
    CHECK(eroded == 1.0);
    CHECK(eroded >= strict);
  }
  SUBCASE("missing counterparts are listed") {
    fs::copy(dir / "gt" / "t0.ppm", dir / "pred");
    fs::copy(dir / "gt" / "t1.ppm", dir / "pred" / "extra.ppm");
    try {
      cmd_eval(c, log);
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("extra.ppm has no ground truth") != std::string::npos);
      CHECK(msg.find("t1.ppm has no prediction") != std::string::npos);
      CHECK(msg.find("t2.ppm has no prediction") != std::string::npos);
    }
  }
}

TEST_CASE("gradient suite reports a corrupted backward rule") {
  verify::GradCase broken{"doubled_backward", 1e-6, [](std::uint64_t seed) {
                            auto x = TensorD::from_data({3}, {0.5 + static_cast<double>(seed), -1.0, 2.0});
                            return check_gradients<double>(
                                [x] {
                                  auto y = make_result<double>("bad_square", x.shape(), x.to_vector(), {x.node()},
                                                               [](Node<double>& self) {
                                                                 auto& g = self.inputs[0]->grad_buffer();
                                                                 for (std::size_t i = 0; i < g.size(); ++i)
                                                                   g[i] += 2.0 * self.grad[i];
                                                               });
                                  return sum_all(y);
                                },
                                {{"x", x}}, 1e-5);
                          }};
  auto cases = verify::primitive_and_block_cases();
  CHECK(cases.size() >= 20);
  cases.resize(2);
  cases.push_back(broken);
  const auto rows = verify::run_gradient_cases(cases, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].passed());
  CHECK(rows[1].passed());
  CHECK_FALSE(rows[2].passed());
  CHECK(rows[2].max_error == doctest::Approx(0.5));
  const auto table = verify::format_grad_table(rows);
  CHECK(table.find("FAIL at x[") != std::string::npos);
  CHECK(table.find("gradient check FAILED") != std::string::npos);
}

TEST_CASE("command line wiring") {
  fixtures::TempDir dir("app");
  std::string out, err;
  CHECK(run({"--help"}, &out) == 0);
  CHECK(out.find("gradcheck") != std::string::npos);
  CHECK(run({}, &out, &err) == 2);
  CHECK(run({"frobnicate"}, &out, &err) == 2);
  CHECK(run({"eval", "--tta", "maybe"}, &out, &err) == 2);

  write_file(dir / "run.ini", "[model]\nvariant = MPVN\n[eval]\nerode = 1\n");
  CHECK(run({"--config", (dir / "run.ini").string(), "--seed", "5", "--variant", "MPVN-R", "--tta", "off", "--erode",
             "0", "--dump-features", "--print-config", "eval"},
            &out, &err) == 2);
  const auto c = parse_config(out);
  CHECK(c.train.seed == 5);
  CHECK(c.model.variant == arch::VariantTag::kMPVN_R);
  CHECK(c.infer.tta == "none");
  CHECK(c.eval.erode == 0);
  CHECK(c.infer.dump_features);
  CHECK(err.find("eval needs eval.gt_dir") != std::string::npos);

  write_file(dir / "bad.ini", "[model]\nvariant = XYZ\nwidth = 3\n");
  CHECK(run({"--config", (dir / "bad.ini").string(), "train"}, &out, &err) == 2);
  CHECK(err.find("bad.ini") != std::string::npos);
  CHECK(err.find("unknown key 'model.width'") != std::string::npos);
  CHECK(err.find("unknown variant 'XYZ'") != std::string::npos);

  CHECK(run({"--set", "model.classes", "eval"}, &out, &err) == 2);
  CHECK(err.find("section.key=value") != std::string::npos);
}
