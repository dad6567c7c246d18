#include "afnet/geo/preprocess.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "afnet/core/errors.hpp"

namespace afnet::geo {

void ChannelStats::check() const {
  if (mean.size() != std.size()) throw DimensionError("channel stats: mean and std lengths differ");
  if (mean.empty()) throw DimensionError("channel stats are empty");
  for (std::size_t c = 0; c < std.size(); ++c) {
    if (!(std[c] > 0.0) || !std::isfinite(std[c]) || !std::isfinite(mean[c])) {
      throw DegenerateInputError("channel " + std::to_string(c) + " has degenerate statistics (std " +
                                 std::to_string(std[c]) + ")");
    }
  }
}

ChannelStats compute_stats(const std::vector<const RasterImage*>& rasters) {
  if (rasters.empty()) throw DegenerateInputError("compute_stats: no rasters");
  const auto channels = rasters.front()->channels;
  ChannelStats out;
  out.mean.assign(static_cast<std::size_t>(channels), 0.0);
  out.std.assign(static_cast<std::size_t>(channels), 0.0);
  double count = 0.0;
  for (const auto* r : rasters) {
    r->check();
    if (r->channels != channels) throw DimensionError("compute_stats: rasters disagree on channel count");
    count += static_cast<double>(r->plane_size());
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t y = 0; y < r->height; ++y)
        for (std::int64_t x = 0; x < r->width; ++x) out.mean[c] += r->value(c, y, x);
  }
  for (auto& m : out.mean) m /= count;
  for (const auto* r : rasters) {
    for (std::int64_t c = 0; c < channels; ++c)
      for (std::int64_t y = 0; y < r->height; ++y)
        for (std::int64_t x = 0; x < r->width; ++x) {
          const double d = r->value(c, y, x) - out.mean[c];
          out.std[c] += d * d;
        }
  }
  for (auto& s : out.std) s = std::sqrt(s / count);
  return out;
}

RasterImage normalize(const RasterImage& img, const ChannelStats& stats) {
  img.check();
  if (static_cast<std::int64_t>(stats.channels()) != img.channels) {
    throw DimensionError("normalize: raster has " + std::to_string(img.channels) + " channels, stats have " +
                         std::to_string(stats.channels()));
  }
  stats.check();
  auto out = RasterImage::make_f32(img.width, img.height, img.channels, img.role);
  for (std::int64_t c = 0; c < img.channels; ++c)
    for (std::int64_t y = 0; y < img.height; ++y)
      for (std::int64_t x = 0; x < img.width; ++x)
        out.f32[out.index(c, y, x)] = static_cast<float>((img.value(c, y, x) - stats.mean[c]) / stats.std[c]);
  return out;
}

std::vector<float> compute_ndvi(std::span<const float> nir, std::span<const float> red) {
  if (nir.size() != red.size()) throw DimensionError("ndvi: channel sizes differ");
  std::vector<float> out(nir.size());
  for (std::size_t i = 0; i < nir.size(); ++i) {
    const double den = static_cast<double>(nir[i]) + red[i];
    const double v = den == 0.0 ? 0.0 : (static_cast<double>(nir[i]) - red[i]) / den;
    out[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

RasterImage compute_ndvi(const RasterImage& optical, std::int64_t nir_channel, std::int64_t red_channel) {
  optical.check();
  if (nir_channel < 0 || red_channel < 0 || nir_channel >= optical.channels || red_channel >= optical.channels) {
    throw DimensionError("ndvi: channel index out of range for a " + std::to_string(optical.channels) +
                         "-channel raster");
  }
  const auto values = optical.as_float();
  const auto hw = static_cast<std::size_t>(optical.plane_size());
  std::span<const float> all(values);
  auto out = RasterImage::make_f32(optical.width, optical.height, 1, RasterRole::kNdvi);
  out.f32 = compute_ndvi(all.subspan(static_cast<std::size_t>(nir_channel) * hw, hw),
                         all.subspan(static_cast<std::size_t>(red_channel) * hw, hw));
  return out;
}

template <typename T>
std::vector<T> mirror_pad(const std::vector<T>& planes, std::int64_t channels, std::int64_t h, std::int64_t w,
                          std::int64_t margin) {
  if (margin < 0) throw GeometryError("negative mirror margin");
  if (margin >= h || margin >= w) {
    throw GeometryError("mirror margin " + std::to_string(margin) + " must be smaller than the " + std::to_string(h) +
                        "x" + std::to_string(w) + " extent");
  }
  if (static_cast<std::int64_t>(planes.size()) != channels * h * w) throw DimensionError("mirror_pad: buffer size");
  const auto ph = h + 2 * margin, pw = w + 2 * margin;
  auto reflect = [](std::int64_t i, std::int64_t n) { return i < 0 ? -i : (i >= n ? 2 * (n - 1) - i : i); };
  std::vector<T> out(static_cast<std::size_t>(channels * ph * pw));
  for (std::int64_t c = 0; c < channels; ++c)
    for (std::int64_t y = 0; y < ph; ++y) {
      const auto sy = reflect(y - margin, h);
      for (std::int64_t x = 0; x < pw; ++x)
        out[static_cast<std::size_t>((c * ph + y) * pw + x)] =
            planes[static_cast<std::size_t>((c * h + sy) * w + reflect(x - margin, w))];
    }
  return out;
}

template std::vector<float> mirror_pad(const std::vector<float>&, std::int64_t, std::int64_t, std::int64_t,
                                       std::int64_t);
template std::vector<double> mirror_pad(const std::vector<double>&, std::int64_t, std::int64_t, std::int64_t,
                                        std::int64_t);
template std::vector<std::uint8_t> mirror_pad(const std::vector<std::uint8_t>&, std::int64_t, std::int64_t,
                                              std::int64_t, std::int64_t);

RasterImage mirror_pad(const RasterImage& img, std::int64_t margin) {
  img.check();
  RasterImage out = img;
  if (img.type == PixelType::kU8) {
    out.u8 = mirror_pad(img.u8, img.channels, img.height, img.width, margin);
  } else {
    out.f32 = mirror_pad(img.f32, img.channels, img.height, img.width, margin);
  }
  out.height += 2 * margin;
  out.width += 2 * margin;
  return out;
}

void write_stats(const std::filesystem::path& path, const ChannelStats& stats) {
  stats.check();
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "channel,mean,std\n";
  char buf[96];
  for (std::size_t c = 0; c < stats.channels(); ++c) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", c, stats.mean[c], stats.std[c]);
    os << buf;
  }
  if (!os) throw IoError("failed writing " + path.string());
}

ChannelStats read_stats(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  ChannelStats out;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "channel,mean,std") continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 3) fail("expected channel,mean,std");
    std::size_t channel = 0;
    const auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), channel);
    if (ec != std::errc() || p != fields[0].data() + fields[0].size()) fail("bad channel index '" + fields[0] + "'");
    if (channel != out.mean.size()) fail("channels must be listed in order starting at 0");
    double v[2];
    for (int k = 0; k < 2; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(fields[1 + k].c_str(), &end);
      if (fields[1 + k].empty() || *end != '\0') fail("bad number '" + fields[1 + k] + "'");
    }
    out.mean.push_back(v[0]);
    out.std.push_back(v[1]);
  }
  if (out.mean.empty()) throw ParseError(path.string() + ": no channel rows");
  out.check();
  return out;
}

}  // namespace afnet::geo
