#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "afnet/cli/config.hpp"
#include "afnet/eval/report.hpp"
#include "afnet/geo/palette.hpp"
#include "afnet/geo/preprocess.hpp"
#include "afnet/geo/raster.hpp"
#include "afnet/geo/tta.hpp"
#include "afnet/train/trainer.hpp"

namespace afnet::cli {

/// Normalized network inputs for one tile: optical channels and the
/// auxiliary pair (NDVI from the raw optical, then normalized DSM).
struct TileInputs {
  geo::RasterImage image;
  geo::RasterImage aux;
};

/// `stats` covers the optical channels followed by the DSM.
TileInputs build_inputs(const geo::RasterImage& optical, const geo::RasterImage& dsm, const geo::ChannelStats& stats,
                        int nir_channel, int red_channel);

/// A class raster from either a palette-colored PPM or a 1-channel class map.
geo::RasterImage read_class_raster(const std::filesystem::path& path, const geo::Palette& palette);

/// Mirror pad, slice at `tile` with half-tile overlap, average softmax over
/// `transforms` per slice, stitch. Returns a `classes`-channel f32 raster
/// with the input extent. `aux` may have zero channels.
geo::RasterImage predict_probabilities(const geo::LogitsFn<float>& logits, const geo::RasterImage& image,
                                       const geo::RasterImage& aux, int classes, int tile,
                                       const std::vector<geo::Dihedral>& transforms, geo::StitchMode stitch);

/// Per-pixel argmax over channels (lowest index on ties), role kLabel.
geo::RasterImage argmax_raster(const geo::RasterImage& probabilities);

struct PrepareSummary {
  std::size_t tiles = 0;
  std::size_t slices = 0;
};

/// Writes `<slice>.image.aft`, `<slice>.aux.aft`, `<slice>.label.pgm` for
/// every slice `<tile>_<row>_<col>`, an `index.csv` listing them, and the
/// channel statistics.
PrepareSummary cmd_prepare(const RunConfig& config, std::ostream& log);

/// Trains on the prepared slices; checkpoints, the training log and a copy
/// of the configuration go to train.checkpoint_dir.
train::TrainResult cmd_train(const RunConfig& config, std::ostream& log);

/// Writes `<tile>.ppm` per manifest entry (plus `<tile>.prob.aft` and
/// `features/` dumps when enabled); returns the label raster paths.
std::vector<std::filesystem::path> cmd_infer(const RunConfig& config, std::ostream& log);

/// Pairs predictions and ground truth by file stem and writes
/// `report.txt` and `metrics.csv`.
eval::EvalReport cmd_eval(const RunConfig& config, std::ostream& log);

/// Prints the gradient table; returns the process exit status.
int cmd_gradcheck(const RunConfig& config, std::ostream& out);

}  // namespace afnet::cli
