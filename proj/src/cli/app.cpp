#include "afnet/cli/app.hpp"

#include <CLI11.hpp>

#include "afnet/cli/commands.hpp"
#include "afnet/core/errors.hpp"

namespace afnet::cli {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-fused multipath segmentation: data preparation, training, tiled inference, evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> tta;
  std::optional<int> erode;
  bool dump_features = false;
  bool print_config = false;
  std::vector<std::string> sets;

  app.add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for initialization, shuffling and augmentation");
  app.add_option("--variant", variant, "DFN, mDFN, MPVN, MPVN-M, MPVN-R or MPVN-RM");
  app.add_option("--tta", tta, "Test-time augmentation")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--erode", erode, "Boundary ignore radius in pixels (0 = strict)");
  app.add_flag("--dump-features", dump_features, "Write attention maps during inference");
  app.add_option("--set", sets, "Override one key, section.key=value (repeatable)")->allow_extra_args(false);
  app.add_flag("--print-config", print_config, "Print the materialized configuration before running");

  struct Sub {
    const char* name;
    const char* help;
    Command cmd;
  };
  const Sub subs[] = {
      {"prepare", "Normalize, derive NDVI and slice the manifest tiles", Command::kPrepare},
      {"train", "Train on prepared slices", Command::kTrain},
      {"infer", "Tiled inference over the infer manifest", Command::kInfer},
      {"eval", "Score predictions against ground truth", Command::kEval},
      {"gradcheck", "Finite-difference gradient suite", Command::kGradcheck},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Command cmd = Command::kAny;
  for (const auto& s : subs)
    if (app.got_subcommand(s.name)) cmd = s.cmd;

  try {
    Overrides overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects section.key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) overrides.emplace_back("train.seed", std::to_string(*seed));
    if (variant) overrides.emplace_back("model.variant", *variant);
    if (tta) overrides.emplace_back("infer.tta", *tta == "on" ? "full" : "none");
    if (erode) overrides.emplace_back("eval.erode", std::to_string(*erode));
    if (dump_features) overrides.emplace_back("infer.dump_features", "true");

    const RunConfig config = config_path.empty() ? parse_config("", overrides) : load_config(config_path, overrides);
    if (print_config) out << serialize_config(config) << '\n';
    config.validate(cmd);

    switch (cmd) {
      case Command::kPrepare:
        cmd_prepare(config, out);
        return 0;
      case Command::kTrain:
        cmd_train(config, out);
        return 0;
      case Command::kInfer:
        cmd_infer(config, out);
        return 0;
      case Command::kEval:
        cmd_eval(config, out);
        return 0;
      case Command::kGradcheck:
        return cmd_gradcheck(config, out);
      case Command::kAny:
        break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace afnet::cli
