#include "afnet/cli/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "afnet/core/errors.hpp"
#include "afnet/geo/palette.hpp"
#include "afnet/geo/tta.hpp"
#include "afnet/train/optimizer.hpp"

namespace afnet::cli {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string encode(int v) { return std::to_string(v); }
std::string encode(std::uint64_t v) { return std::to_string(v); }
std::string encode(bool v) { return v ? "true" : "false"; }
std::string encode(const std::string& v) { return v; }
std::string encode(const fs::path& v) { return v.string(); }
std::string encode(arch::VariantTag v) { return arch::to_string(v); }
std::string encode(arch::BackboneKind v) { return arch::to_string(v); }
std::string encode(geo::StitchMode v) { return geo::to_string(v); }
std::string encode(nn::UpsampleMapping v) {
  return v == nn::UpsampleMapping::kHalfPixel ? "half_pixel" : "align_corners";
}
std::string encode(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string encode(const std::vector<std::string>& v) { return boost::algorithm::join(v, ","); }
std::string encode(const std::vector<int>& v) {
  std::vector<std::string> parts;
  for (int x : v) parts.push_back(std::to_string(x));
  return encode(parts);
}

template <typename N>
N parse_number(const std::string& s, const char* what) {
  N v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("'" + s + "' is not " + what);
  }
  return v;
}

void decode(const std::string& s, int& v) { v = parse_number<int>(s, "an integer"); }
void decode(const std::string& s, std::uint64_t& v) { v = parse_number<std::uint64_t>(s, "a non-negative integer"); }
void decode(const std::string& s, double& v) { v = parse_number<double>(s, "a number"); }
void decode(const std::string& s, std::string& v) { v = s; }
void decode(const std::string& s, fs::path& v) { v = s; }
void decode(const std::string& s, arch::VariantTag& v) { v = arch::parse_variant_tag(s); }
void decode(const std::string& s, arch::BackboneKind& v) { v = arch::parse_backbone_kind(s); }
void decode(const std::string& s, geo::StitchMode& v) { v = geo::parse_stitch_mode(s); }
void decode(const std::string& s, bool& v) {
  if (s == "true") {
    v = true;
  } else if (s == "false") {
    v = false;
  } else {
    throw ValidationError("'" + s + "' is not true or false");
  }
}
void decode(const std::string& s, nn::UpsampleMapping& v) {
  if (s == "half_pixel") {
    v = nn::UpsampleMapping::kHalfPixel;
  } else if (s == "align_corners") {
    v = nn::UpsampleMapping::kAlignCorners;
  } else {
    throw ValidationError("'" + s + "' is not half_pixel or align_corners");
  }
}
void decode(const std::string& s, std::vector<std::string>& v) {
  v.clear();
  if (boost::algorithm::trim_copy(s).empty()) return;
  boost::algorithm::split(v, s, boost::algorithm::is_any_of(","));
  for (auto& part : v) {
    boost::algorithm::trim(part);
    if (part.empty()) throw ValidationError("empty entry in list '" + s + "'");
  }
}
void decode(const std::string& s, std::vector<int>& v) {
  std::vector<std::string> parts;
  decode(s, parts);
  v.clear();
  for (const auto& p : parts) v.push_back(parse_number<int>(p, "an integer"));
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename S, typename V>
Field field(const char* section, const char* key, S RunConfig::*sec, V S::*member) {
  return {section, key, [=](const RunConfig& c) { return encode(c.*sec.*member); },
          [=](RunConfig& c, const std::string& s) { decode(s, c.*sec.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using R = RunConfig;
    std::vector<Field> f{
        field("model", "variant", &R::model, &ModelConfig::variant),
        field("model", "main_backbone", &R::model, &ModelConfig::main_backbone),
        field("model", "aux_backbone", &R::model, &ModelConfig::aux_backbone),
        field("model", "decoder_width", &R::model, &ModelConfig::decoder_width),
        field("model", "classes", &R::model, &ModelConfig::classes),
        field("model", "attention_reduction", &R::model, &ModelConfig::attention_reduction),
        field("model", "rafb_caption_order", &R::model, &ModelConfig::rafb_caption_order),
        field("model", "upsample", &R::model, &ModelConfig::upsample),
        field("data", "manifest", &R::data, &DataConfig::manifest),
        field("data", "prepared_dir", &R::data, &DataConfig::prepared_dir),
        field("data", "stats", &R::data, &DataConfig::stats),
        field("data", "slice", &R::data, &DataConfig::slice),
        field("data", "overlap", &R::data, &DataConfig::overlap),
        field("data", "crop", &R::data, &DataConfig::crop),
        field("data", "hflip", &R::data, &DataConfig::hflip),
        field("data", "vflip", &R::data, &DataConfig::vflip),
        field("data", "rotate", &R::data, &DataConfig::rotate),
        field("data", "palette", &R::data, &DataConfig::palette),
        field("data", "nir_channel", &R::data, &DataConfig::nir_channel),
        field("data", "red_channel", &R::data, &DataConfig::red_channel),
        field("data", "val_tiles", &R::data, &DataConfig::val_tiles),
        field("train", "epochs", &R::train, &TrainConfig::epochs),
        field("train", "batch_size", &R::train, &TrainConfig::batch_size),
        field("train", "seed", &R::train, &TrainConfig::seed),
        field("train", "lr0", &R::train, &TrainConfig::lr0),
        field("train", "lr1", &R::train, &TrainConfig::lr1),
        field("train", "warmup_epochs", &R::train, &TrainConfig::warmup_epochs),
        field("train", "step_interval", &R::train, &TrainConfig::step_interval),
        field("train", "step_factor", &R::train, &TrainConfig::step_factor),
        field("train", "beta1", &R::train, &TrainConfig::beta1),
        field("train", "beta2", &R::train, &TrainConfig::beta2),
        field("train", "eps", &R::train, &TrainConfig::eps),
        field("train", "weight_decay", &R::train, &TrainConfig::weight_decay),
        field("train", "checkpoint_dir", &R::train, &TrainConfig::checkpoint_dir),
        field("train", "log", &R::train, &TrainConfig::log),
        field("train", "resume", &R::train, &TrainConfig::resume),
        field("infer", "manifest", &R::infer, &InferConfig::manifest),
        field("infer", "checkpoint", &R::infer, &InferConfig::checkpoint),
        field("infer", "tile", &R::infer, &InferConfig::tile),
        field("infer", "overlap", &R::infer, &InferConfig::overlap),
        field("infer", "tta", &R::infer, &InferConfig::tta),
        field("infer", "stitch", &R::infer, &InferConfig::stitch),
        field("infer", "output_dir", &R::infer, &InferConfig::output_dir),
        field("infer", "probabilities", &R::infer, &InferConfig::probabilities),
        field("infer", "dump_features", &R::infer, &InferConfig::dump_features),
        field("eval", "erode", &R::eval, &EvalConfig::erode),
        field("eval", "mean_classes", &R::eval, &EvalConfig::mean_classes),
        field("eval", "pred_dir", &R::eval, &EvalConfig::pred_dir),
        field("eval", "gt_dir", &R::eval, &EvalConfig::gt_dir),
        field("eval", "report_dir", &R::eval, &EvalConfig::report_dir),
    };
    for (auto& x : f) {
      if (x.key == "palette") {
        x.set = [](RunConfig& c, const std::string& s) { c.data.palette = geo::format_palette(geo::parse_palette(s)); };
      } else if (x.section == "infer" && x.key == "tta") {
        x.set = [](RunConfig& c, const std::string& s) {
          geo::tta_transforms(s);
          c.infer.tta = s;
        };
      }
    }
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

[[noreturn]] void throw_all(const std::string& what, const std::vector<std::string>& problems) {
  std::string msg = what + " (" + std::to_string(problems.size()) + " problem" + (problems.size() == 1 ? "" : "s") + "):";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ValidationError(msg);
}

bool multiple_of(int v, int m) { return v > 0 && v % m == 0; }

}  // namespace

RunConfig::RunConfig() { data.palette = geo::format_palette(geo::Palette::standard()); }

arch::ModelVariant RunConfig::model_variant() const {
  auto v = arch::ModelVariant::from_tag(model.variant, model.main_backbone, model.aux_backbone, model.decoder_width,
                                        model.classes);
  v.attention_reduction = model.attention_reduction;
  v.rafb_caption_order = model.rafb_caption_order;
  v.upsample = model.upsample;
  return v;
}

std::vector<std::string> RunConfig::violations(Command cmd) const {
  std::vector<std::string> out;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  if (model.classes < 1 || model.classes > 254) {
    out.push_back("model.classes must lie in [1, 254]");
  } else {
    for (const auto& v : model_variant().violations()) out.push_back("model: " + v);
  }
  const auto palette = geo::parse_palette(data.palette);
  need(static_cast<int>(palette.size()) == model.classes,
       "data.palette has " + std::to_string(palette.size()) + " colors but model.classes is " +
           std::to_string(model.classes));

  need(data.slice >= 2 && data.slice % 2 == 0, "data.slice must be even and >= 2");
  need(data.overlap * 2 == data.slice, "data.overlap must be half of data.slice");
  need(data.crop >= 1 && data.crop <= data.slice, "data.crop must lie in [1, data.slice]");
  need(data.nir_channel >= 0 && data.nir_channel < 3, "data.nir_channel must be 0, 1 or 2");
  need(data.red_channel >= 0 && data.red_channel < 3, "data.red_channel must be 0, 1 or 2");
  need(data.nir_channel != data.red_channel, "data.nir_channel and data.red_channel must differ");
  need(std::set<std::string>(data.val_tiles.begin(), data.val_tiles.end()).size() == data.val_tiles.size(),
       "data.val_tiles lists a tile twice");

  need(train.epochs >= 1, "train.epochs must be >= 1");
  need(train.batch_size >= 1, "train.batch_size must be >= 1");
  train::LrSchedule schedule{train.lr0, train.lr1, train.warmup_epochs, train.step_interval, train.step_factor, 1};
  for (const auto& v : schedule.violations()) out.push_back("train: " + v);
  need(train.beta1 >= 0.0 && train.beta1 < 1.0, "train.beta1 must lie in [0, 1)");
  need(train.beta2 >= 0.0 && train.beta2 < 1.0, "train.beta2 must lie in [0, 1)");
  need(train.eps > 0.0, "train.eps must be > 0");
  need(train.weight_decay >= 0.0, "train.weight_decay must be >= 0");

  need(infer.tile >= 2 && infer.tile % 2 == 0, "infer.tile must be even and >= 2");
  need(infer.overlap * 2 == infer.tile, "infer.overlap must be half of infer.tile");

  need(eval.erode >= 0, "eval.erode must be >= 0");
  need(!eval.mean_classes.empty(), "eval.mean_classes must not be empty");
  for (int c : eval.mean_classes)
    need(c >= 0 && c < model.classes, "eval.mean_classes entry " + std::to_string(c) + " is not a class");
  need(std::set<int>(eval.mean_classes.begin(), eval.mean_classes.end()).size() == eval.mean_classes.size(),
       "eval.mean_classes lists a class twice");

  switch (cmd) {
    case Command::kPrepare:
      need(!data.manifest.empty(), "prepare needs data.manifest");
      need(!data.prepared_dir.empty(), "prepare needs data.prepared_dir");
      need(!data.stats.empty(), "prepare needs data.stats");
      break;
    case Command::kTrain:
      need(!data.prepared_dir.empty(), "train needs data.prepared_dir");
      need(multiple_of(data.crop, 32), "train needs data.crop to be a multiple of 32");
      break;
    case Command::kInfer:
      need(!infer.manifest.empty(), "infer needs infer.manifest");
      need(!infer.checkpoint.empty(), "infer needs infer.checkpoint");
      need(!infer.output_dir.empty(), "infer needs infer.output_dir");
      need(!data.stats.empty(), "infer needs data.stats");
      need(multiple_of(infer.tile, 32), "infer needs infer.tile to be a multiple of 32");
      break;
    case Command::kEval:
      need(!eval.pred_dir.empty(), "eval needs eval.pred_dir");
      need(!eval.gt_dir.empty(), "eval needs eval.gt_dir");
      need(!eval.report_dir.empty(), "eval needs eval.report_dir");
      break;
    case Command::kAny:
    case Command::kGradcheck:
      break;
  }
  return out;
}

void RunConfig::validate(Command cmd) const {
  auto problems = violations(cmd);
  if (!problems.empty()) throw_all("invalid configuration", problems);
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<std::string> problems;
  for (const auto& [path, value] : overrides) {
    const auto dot = path.find('.');
    if (dot == std::string::npos || !find_field(path.substr(0, dot), path.substr(dot + 1))) {
      problems.push_back("unknown override key '" + path + "'");
      continue;
    }
    const auto section = path.substr(0, dot);
    auto* body = tree.get_child_optional(section).get_ptr();
    if (!body) body = &tree.add_child(section, pt::ptree());
    body->put(pt::ptree::path_type(path.substr(dot + 1), '\0'), value);
  }

  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      problems.push_back("key '" + section + "' is outside any section");
      continue;
    }
    if (std::none_of(fields().begin(), fields().end(), [&](const Field& f) { return f.section == section; })) {
      problems.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, node] : body) {
      const Field* f = find_field(section, key);
      if (!f) {
        problems.push_back("unknown key '" + section + "." + key + "'");
        continue;
      }
      try {
        f->set(config, node.data());
      } catch (const Error& e) {
        problems.push_back(section + "." + key + ": " + e.what());
      }
    }
  }
  for (auto& v : config.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) throw_all("invalid configuration", problems);
  return config;
}

RunConfig load_config(const fs::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), overrides);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream os;
  std::string current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << f.section << "]\n";
      current = f.section;
    }
    os << f.key << " = " << f.get(config) << '\n';
  }
  return os.str();
}

void save_config(const fs::path& path, const RunConfig& config) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << serialize_config(config);
  if (!out) throw IoError("cannot write config " + path.string());
}

}  // namespace afnet::cli
