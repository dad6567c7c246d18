#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "afnet/geo/manifest.hpp"
#include "afnet/geo/palette.hpp"
#include "afnet/geo/raster.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("afnet_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Class map of axis-aligned blocks; optical color and DSM height are
/// functions of the class plus seeded noise.
struct SyntheticTile {
  afnet::geo::RasterImage optical;
  afnet::geo::RasterImage dsm;
  afnet::geo::RasterImage classes;
};

inline SyntheticTile make_tile(std::int64_t w, std::int64_t h, std::uint64_t seed, int num_classes = 6) {
  using afnet::geo::RasterImage;
  using afnet::geo::RasterRole;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cls(0, num_classes - 1), noise(-10, 10);
  SyntheticTile t{RasterImage::make_u8(w, h, 3, RasterRole::kOptical), RasterImage::make_f32(w, h, 1, RasterRole::kDsm),
                  RasterImage::make_u8(w, h, 1, RasterRole::kLabel)};
  const std::int64_t block = 5;
  std::vector<int> block_class(static_cast<std::size_t>((w / block + 1) * (h / block + 1)));
  for (auto& c : block_class) c = cls(rng);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      const int c = block_class[static_cast<std::size_t>((y / block) * (w / block + 1) + x / block)];
      t.classes.u8[t.classes.index(0, y, x)] = static_cast<std::uint8_t>(c);
      for (int ch = 0; ch < 3; ++ch) {
        const int v = 40 + 30 * ((c + ch) % 6) + noise(rng);
        t.optical.u8[t.optical.index(ch, y, x)] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
      t.dsm.f32[t.dsm.index(0, y, x)] = static_cast<float>(2.5 * c + 0.1 * noise(rng));
    }
  return t;
}

/// Writes `<id>.optical.ppm`, `<id>.dsm.aft` and (when labeled)
/// `<id>.label.ppm` into `dir`; returns the manifest entry.
inline afnet::geo::ManifestEntry write_tile(const fs::path& dir, const std::string& id, const SyntheticTile& t,
                                            bool labeled = true) {
  afnet::geo::ManifestEntry e{id, dir / (id + ".optical.ppm"), dir / (id + ".dsm.aft"), {}};
  afnet::geo::write_raster(e.optical, t.optical);
  afnet::geo::write_raster(e.dsm, t.dsm);
  if (labeled) {
    e.label = dir / (id + ".label.ppm");
    afnet::geo::write_raster(e.label, afnet::geo::encode_labels(t.classes));
  }
  return e;
}

}  // namespace fixtures
