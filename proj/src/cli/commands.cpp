#include "afnet/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "afnet/core/errors.hpp"
#include "afnet/eval/metrics.hpp"
#include "afnet/geo/manifest.hpp"
#include "afnet/geo/parallel.hpp"
#include "afnet/geo/tiling.hpp"
#include "afnet/verify/grad_suite.hpp"

namespace afnet::cli {

namespace fs = std::filesystem;
using geo::RasterImage;
using geo::RasterRole;

namespace {

std::string extent(const RasterImage& r) { return std::to_string(r.width) + "x" + std::to_string(r.height); }

void require_same_extent(const RasterImage& a, const char* a_name, const RasterImage& b, const char* b_name,
                         const std::string& tile) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionError("tile " + tile + ": " + b_name + " extent " + extent(b) + " does not match " + a_name +
                         " extent " + extent(a));
  }
}

RasterImage to_f32(const RasterImage& r) {
  if (r.type == geo::PixelType::kF32) return r;
  auto out = RasterImage::make_f32(r.width, r.height, r.channels, r.role);
  out.f32 = r.as_float();
  return out;
}

RasterImage stack(const RasterImage& a, const RasterImage& b, RasterRole role) {
  auto out = RasterImage::make_f32(a.width, a.height, a.channels + b.channels, role);
  auto fa = a.as_float(), fb = b.as_float();
  std::copy(fa.begin(), fa.end(), out.f32.begin());
  std::copy(fb.begin(), fb.end(), out.f32.begin() + static_cast<std::ptrdiff_t>(fa.size()));
  return out;
}

geo::ChannelStats stats_range(const geo::ChannelStats& s, std::size_t begin, std::size_t count) {
  geo::ChannelStats out;
  out.mean.assign(s.mean.begin() + static_cast<std::ptrdiff_t>(begin),
                  s.mean.begin() + static_cast<std::ptrdiff_t>(begin + count));
  out.std.assign(s.std.begin() + static_cast<std::ptrdiff_t>(begin),
                 s.std.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

struct TileSources {
  RasterImage optical;
  RasterImage dsm;
  RasterImage label;  // empty when the manifest lists none
};

TileSources read_sources(const geo::ManifestEntry& e, const geo::Palette& palette) {
  TileSources s;
  s.optical = geo::read_raster(e.optical, RasterRole::kOptical);
  if (s.optical.channels != 3) {
    throw DimensionError("tile " + e.tile_id + ": optical raster has " + std::to_string(s.optical.channels) +
                         " channels, expected 3");
  }
  s.dsm = geo::read_raster(e.dsm, RasterRole::kDsm);
  if (s.dsm.channels != 1) {
    throw DimensionError("tile " + e.tile_id + ": DSM raster has " + std::to_string(s.dsm.channels) +
                         " channels, expected 1");
  }
  require_same_extent(s.optical, "optical", s.dsm, "DSM", e.tile_id);
  if (!e.label.empty()) {
    s.label = read_class_raster(e.label, palette);
    require_same_extent(s.optical, "optical", s.label, "label", e.tile_id);
  }
  return s;
}

template <typename T>
std::vector<std::vector<T>> slice_padded(const std::vector<T>& planes, std::int64_t channels,
                                          const geo::TileGrid& grid) {
  return geo::slice_tiles(planes, channels, grid);
}

std::string slice_name(const std::string& tile, const geo::TileGrid& grid, std::size_t i) {
  return tile + "_" + std::to_string(i / grid.cols()) + "_" + std::to_string(i % grid.cols());
}

RasterImage planes_raster(std::vector<float> planes, std::int64_t channels, std::int64_t size, RasterRole role) {
  auto r = RasterImage::make_f32(size, size, channels, role);
  r.f32 = std::move(planes);
  return r;
}

struct IndexRow {
  std::string slice;
  std::string tile;
};

std::vector<IndexRow> read_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open slice index " + path.string() + " (run prepare first)");
  std::vector<IndexRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "slice,tile,row,col") throw ParseError(path.string() + ": unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string part; std::getline(ss, part, ',');) f.push_back(part);
    if (f.size() != 4) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    rows.push_back({f[0], f[1]});
  }
  return rows;
}

train::Sample load_sample(const fs::path& dir, const std::string& slice, bool with_aux) {
  const auto image = geo::read_raster(dir / (slice + ".image.aft"), RasterRole::kOptical);
  const auto label_path = dir / (slice + ".label.pgm");
  if (!fs::exists(label_path)) throw IoError("slice " + slice + " has no label (" + label_path.string() + ")");
  const auto label = geo::read_raster(label_path, RasterRole::kLabel);
  train::Sample s;
  s.h = image.height;
  s.w = image.width;
  s.image_channels = image.channels;
  s.image = to_f32(image).f32;
  if (with_aux) {
    const auto aux = geo::read_raster(dir / (slice + ".aux.aft"), RasterRole::kOther);
    s.aux_channels = aux.channels;
    s.aux = to_f32(aux).f32;
  }
  s.label = label.u8;
  s.check();
  return s;
}

std::map<std::string, fs::path> class_rasters_in(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) throw IoError(std::string(what) + " directory " + dir.string() + " does not exist");
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext != ".ppm" && ext != ".pgm") continue;
    const auto stem = e.path().stem().string();
    if (!out.emplace(stem, e.path()).second) {
      throw ValidationError(std::string(what) + " directory holds two rasters for tile " + stem);
    }
  }
  return out;
}

}  // namespace

TileInputs build_inputs(const RasterImage& optical, const RasterImage& dsm, const geo::ChannelStats& stats,
                        int nir_channel, int red_channel) {
  if (stats.channels() != static_cast<std::size_t>(optical.channels + dsm.channels)) {
    throw DimensionError("statistics cover " + std::to_string(stats.channels()) + " channels, inputs have " +
                         std::to_string(optical.channels + dsm.channels));
  }
  TileInputs t;
  t.image = geo::normalize(optical, stats_range(stats, 0, static_cast<std::size_t>(optical.channels)));
  const auto ndvi = geo::compute_ndvi(optical, nir_channel, red_channel);
  const auto height =
      geo::normalize(dsm, stats_range(stats, static_cast<std::size_t>(optical.channels), 1));
  t.aux = stack(ndvi, height, RasterRole::kOther);
  return t;
}

RasterImage read_class_raster(const fs::path& path, const geo::Palette& palette) {
  auto r = geo::read_raster(path, RasterRole::kOther);
  if (r.type == geo::PixelType::kU8 && r.channels == 3) {
    try {
      return geo::decode_labels(r, palette);
    } catch (const Error& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
  if (r.type == geo::PixelType::kU8 && r.channels == 1) {
    r.role = RasterRole::kLabel;
    return r;
  }
  throw FormatError(path.string() + ": expected a color PPM or a 1-channel class map");
}

RasterImage predict_probabilities(const geo::LogitsFn<float>& logits, const RasterImage& image,
                                  const RasterImage& aux, int classes, int tile,
                                  const std::vector<geo::Dihedral>& transforms, geo::StitchMode stitch) {
  if (aux.channels > 0) require_same_extent(image, "image", aux, "aux", "input");
  const auto grid = geo::make_tile_grid(image.width, image.height, tile, tile / 2);
  const auto image_slices = slice_padded(to_f32(image).f32, image.channels, grid);
  std::vector<std::vector<float>> aux_slices;
  if (aux.channels > 0) aux_slices = slice_padded(to_f32(aux).f32, aux.channels, grid);

  std::vector<std::vector<float>> probs(image_slices.size());
  const float inv = 1.0f / static_cast<float>(transforms.size());
  geo::parallel_for(image_slices.size(), [&](std::size_t i) {
    const auto t = static_cast<std::int64_t>(tile);
    auto x = TensorF::from_data({1, image.channels, t, t}, image_slices[i]);
    TensorF a;
    if (aux.channels > 0) a = TensorF::from_data({1, aux.channels, t, t}, aux_slices[i]);
    auto p = geo::tta_probabilities(logits, x, a, transforms);
    if (p.dim(1) != classes) {
      throw DimensionError("model produced " + std::to_string(p.dim(1)) + " classes, expected " +
                           std::to_string(classes));
    }
    auto v = p.to_vector();
    for (auto& e : v) e *= inv;
    probs[i] = std::move(v);
  });
  auto out = RasterImage::make_f32(image.width, image.height, classes, RasterRole::kProbability);
  out.f32 = geo::stitch_tiles(probs, classes, grid, stitch);
  return out;
}

RasterImage argmax_raster(const RasterImage& probabilities) {
  const auto plane = probabilities.plane_size();
  auto out = RasterImage::make_u8(probabilities.width, probabilities.height, 1, RasterRole::kLabel);
  const auto values = probabilities.as_float();
  for (std::int64_t i = 0; i < plane; ++i) {
    std::int64_t best = 0;
    for (std::int64_t c = 1; c < probabilities.channels; ++c)
      if (values[static_cast<std::size_t>(c * plane + i)] > values[static_cast<std::size_t>(best * plane + i)]) best = c;
    out.u8[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(best);
  }
  return out;
}

PrepareSummary cmd_prepare(const RunConfig& config, std::ostream& log) {
  config.validate(Command::kPrepare);
  const auto palette = geo::parse_palette(config.data.palette);
  const auto entries = geo::read_manifest(config.data.manifest);
  if (entries.empty()) throw ValidationError("manifest " + config.data.manifest.string() + " lists no tiles");

  std::vector<TileSources> sources(entries.size());
  geo::parallel_for(entries.size(), [&](std::size_t i) { sources[i] = read_sources(entries[i], palette); });

  std::vector<RasterImage> raw(entries.size());
  std::vector<const RasterImage*> raw_ptrs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    raw[i] = stack(sources[i].optical, sources[i].dsm, RasterRole::kOther);
    raw_ptrs.push_back(&raw[i]);
  }
  const auto stats = geo::compute_stats(raw_ptrs);
  raw.clear();
  const auto& dir = config.data.prepared_dir;
  fs::create_directories(dir);
  if (config.data.stats.has_parent_path()) fs::create_directories(config.data.stats.parent_path());
  geo::write_stats(config.data.stats, stats);
  const auto slice = static_cast<std::int64_t>(config.data.slice);
  std::vector<std::vector<std::string>> names(entries.size());
  geo::parallel_for(entries.size(), [&](std::size_t i) {
    const auto& src = sources[i];
    const auto& id = entries[i].tile_id;
    const auto inputs = build_inputs(src.optical, src.dsm, stats, config.data.nir_channel, config.data.red_channel);
    const auto grid = geo::make_tile_grid(src.optical.width, src.optical.height, slice, config.data.overlap);
    const auto images = slice_padded(inputs.image.f32, inputs.image.channels, grid);
    const auto auxes = slice_padded(inputs.aux.f32, inputs.aux.channels, grid);
    std::vector<std::vector<std::uint8_t>> labels;
    if (!src.label.u8.empty()) labels = slice_padded(src.label.u8, 1, grid);
    for (std::size_t k = 0; k < images.size(); ++k) {
      const auto name = slice_name(id, grid, k);
      geo::write_raster(dir / (name + ".image.aft"),
                        planes_raster(images[k], inputs.image.channels, slice, RasterRole::kOptical));
      geo::write_raster(dir / (name + ".aux.aft"), planes_raster(auxes[k], inputs.aux.channels, slice, RasterRole::kOther));
      if (!labels.empty()) {
        auto lab = RasterImage::make_u8(slice, slice, 1, RasterRole::kLabel);
        lab.u8 = labels[k];
        geo::write_raster(dir / (name + ".label.pgm"), lab);
      }
      names[i].push_back(name);
    }
  });

  PrepareSummary summary{entries.size(), 0};
  std::ofstream index(dir / "index.csv", std::ios::binary);
  index << "slice,tile,row,col\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto grid = geo::make_tile_grid(sources[i].optical.width, sources[i].optical.height, slice,
                                          config.data.overlap);
    for (std::size_t k = 0; k < names[i].size(); ++k) {
      index << names[i][k] << ',' << entries[i].tile_id << ',' << k / grid.cols() << ',' << k % grid.cols() << '\n';
    }
    summary.slices += names[i].size();
  }
  if (!index) throw IoError("cannot write " + (dir / "index.csv").string());
  log << "prepared " << summary.slices << " slices from " << summary.tiles << " tiles into " << dir.string() << '\n';
  return summary;
}

train::TrainResult cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate(Command::kTrain);
  const auto variant = config.model_variant();
  const bool with_aux = variant.multipath || variant.stacks_aux();
  const auto rows = read_index(config.data.prepared_dir / "index.csv");

  std::set<std::string> tiles;
  for (const auto& r : rows) tiles.insert(r.tile);
  std::vector<std::string> unknown;
  for (const auto& t : config.data.val_tiles)
    if (!tiles.count(t)) unknown.push_back(t);
  if (!unknown.empty()) {
    std::string msg = "data.val_tiles names tiles absent from the prepared set:";
    for (const auto& t : unknown) msg += " " + t;
    throw ValidationError(msg);
  }
  const std::set<std::string> val_set(config.data.val_tiles.begin(), config.data.val_tiles.end());
  std::vector<train::Sample> train_set, val_set_samples;
  for (const auto& r : rows) {
    auto s = load_sample(config.data.prepared_dir, r.slice, with_aux);
    (val_set.count(r.tile) ? val_set_samples : train_set).push_back(std::move(s));
  }
  if (train_set.empty()) throw DegenerateInputError("no training slices left after the validation split");
  for (const auto& s : train_set) {
    if (s.h < config.data.crop || s.w < config.data.crop) {
      throw ValidationError("data.crop " + std::to_string(config.data.crop) + " exceeds the prepared slice extent " +
                            std::to_string(s.w) + "x" + std::to_string(s.h));
    }
  }

  auto model = arch::AfNetModel<float>::build(variant, config.train.seed);
  train::AdamState state;
  state.config = {config.train.beta1, config.train.beta2, config.train.eps, config.train.weight_decay};
  int start_epoch = 0;
  if (!config.train.resume.empty()) {
    start_epoch = train::load_training_checkpoint(config.train.resume, model, &state);
    log << "resumed from " << config.train.resume.string() << " at epoch " << start_epoch << " (step " << state.step
        << ")\n";
  }
  if (!config.train.checkpoint_dir.empty()) save_config(config.train.checkpoint_dir / "config.ini", config);
  if (start_epoch >= config.train.epochs) {
    log << "nothing to do: checkpoint is at epoch " << start_epoch << " of " << config.train.epochs << '\n';
    return {};
  }

  train::TrainOptions opt;
  opt.epochs = config.train.epochs - start_epoch;
  opt.start_epoch = start_epoch;
  opt.batch_size = config.train.batch_size;
  opt.seed = config.train.seed;
  opt.adam = state.config;
  opt.schedule = {config.train.lr0, config.train.lr1, config.train.warmup_epochs, config.train.step_interval,
                  config.train.step_factor, 1};
  opt.augment = {config.data.hflip, config.data.vflip, config.data.rotate, config.data.crop};
  opt.checkpoint_dir = config.train.checkpoint_dir;
  opt.log_path = config.train.log;

  log << "training " << arch::to_string(variant.tag) << " on " << train_set.size() << " slices ("
      << val_set_samples.size() << " validation), epochs " << start_epoch << ".." << config.train.epochs - 1 << '\n';
  auto result = train::train_loop(model, state, train_set, val_set_samples.empty() ? nullptr : &val_set_samples, opt,
                                  [&](const train::EpochRecord& r) {
                                    log << "epoch " << r.epoch << " lr " << r.lr << " loss " << r.train_loss;
                                    if (r.val_acc) log << " val_acc " << *r.val_acc;
                                    log << '\n';
                                    return true;
                                  });
  return result;
}

std::vector<fs::path> cmd_infer(const RunConfig& config, std::ostream& log) {
  config.validate(Command::kInfer);
  const auto palette = geo::parse_palette(config.data.palette);
  const auto variant = config.model_variant();
  auto model = arch::AfNetModel<float>::build(variant, config.train.seed);
  train::load_training_checkpoint(config.infer.checkpoint, model, nullptr);
  const auto stats = geo::read_stats(config.data.stats);
  const auto entries = geo::read_manifest(config.infer.manifest);
  const auto transforms = geo::tta_transforms(config.infer.tta);
  const bool with_aux = variant.multipath || variant.stacks_aux();

  geo::LogitsFn<float> logits = [&](const TensorF& image, const TensorF& aux) {
    return model.predict_logits(image, with_aux ? aux : TensorF{});
  };
  const auto& out_dir = config.infer.output_dir;
  fs::create_directories(out_dir);
  std::vector<fs::path> outputs;
  for (const auto& e : entries) {
    auto src = read_sources({e.tile_id, e.optical, e.dsm, {}}, palette);
    const auto inputs = build_inputs(src.optical, src.dsm, stats, config.data.nir_channel, config.data.red_channel);
    const auto probs = predict_probabilities(logits, inputs.image, inputs.aux, config.model.classes,
                                             config.infer.tile, transforms, config.infer.stitch);
    const auto path = out_dir / (e.tile_id + ".ppm");
    geo::write_raster(path, geo::encode_labels(argmax_raster(probs), palette));
    if (config.infer.probabilities) geo::write_raster(out_dir / (e.tile_id + ".prob.aft"), probs);
    if (config.infer.dump_features) {
      const auto feature_dir = out_dir / "features";
      fs::create_directories(feature_dir);
      const auto grid = geo::make_tile_grid(inputs.image.width, inputs.image.height, config.infer.tile,
                                            config.infer.tile / 2);
      const auto images = slice_padded(inputs.image.f32, inputs.image.channels, grid);
      const auto auxes = slice_padded(inputs.aux.f32, inputs.aux.channels, grid);
      const auto t = static_cast<std::int64_t>(config.infer.tile);
      NoGradGuard guard;
      for (std::size_t k = 0; k < images.size(); ++k) {
        arch::FeatureSink<float> sink;
        model.forward(TensorF::from_data({1, inputs.image.channels, t, t}, images[k]),
                      with_aux ? TensorF::from_data({1, inputs.aux.channels, t, t}, auxes[k]) : TensorF{},
                      nn::NormMode::kEval, &sink);
        for (const auto& [name, map] : sink.maps) {
          auto r = RasterImage::make_f32(map.dim(3), map.dim(2), map.dim(1), RasterRole::kOther);
          r.f32 = map.to_vector();
          geo::write_raster(feature_dir / (slice_name(e.tile_id, grid, k) + "." + name + ".aft"), r);
        }
      }
    }
    log << "wrote " << path.string() << " (" << extent(src.optical) << ")\n";
    outputs.push_back(path);
  }
  return outputs;
}

eval::EvalReport cmd_eval(const RunConfig& config, std::ostream& log) {
  config.validate(Command::kEval);
  const auto palette = geo::parse_palette(config.data.palette);
  const auto preds = class_rasters_in(config.eval.pred_dir, "prediction");
  const auto truths = class_rasters_in(config.eval.gt_dir, "ground-truth");
  std::vector<std::string> problems;
  for (const auto& [id, p] : preds)
    if (!truths.count(id)) problems.push_back("prediction " + p.string() + " has no ground truth");
  for (const auto& [id, p] : truths)
    if (!preds.count(id)) problems.push_back("ground truth " + p.string() + " has no prediction");
  if (!problems.empty()) {
    std::string msg = "unmatched tiles:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  if (preds.empty()) throw ValidationError("no rasters to evaluate in " + config.eval.pred_dir.string());

  std::vector<eval::TileResult> tiles;
  for (const auto& [id, pred_path] : preds) {
    const auto pred = read_class_raster(pred_path, palette);
    const auto truth = read_class_raster(truths.at(id), palette);
    require_same_extent(truth, "ground-truth", pred, "prediction", id);
    const auto truth_map = geo::to_label_map(truth);
    eval::IgnoreMask mask;
    if (config.eval.erode > 0) mask = eval::boundary_ignore_mask(truth_map, config.eval.erode);
    tiles.push_back({id, eval::confusion_matrix(geo::to_label_map(pred), truth_map, config.model.classes,
                                                config.eval.erode > 0 ? &mask : nullptr)});
  }
  auto report = eval::make_report(std::move(tiles), palette.names, config.eval.mean_classes);
  const auto text = eval::format_text(report);
  fs::create_directories(config.eval.report_dir);
  std::ofstream(config.eval.report_dir / "report.txt", std::ios::binary) << text;
  std::ofstream(config.eval.report_dir / "metrics.csv", std::ios::binary) << eval::format_csv(report);
  log << text;
  return report;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  config.validate(Command::kGradcheck);
  const auto rows = verify::run_gradient_cases(verify::standard_gradient_cases(), 5);
  out << verify::format_grad_table(rows);
  return std::all_of(rows.begin(), rows.end(), [](const verify::GradRow& r) { return r.passed(); }) ? 0 : 1;
}

}  // namespace afnet::cli
