#include "afnet/geo/palette.hpp"

#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>

#include "afnet/core/errors.hpp"

namespace afnet::geo {

namespace {

std::string color_text(const Rgb& c) {
  return "(" + std::to_string(c[0]) + ", " + std::to_string(c[1]) + ", " + std::to_string(c[2]) + ")";
}

std::uint32_t pack(const Rgb& c) { return std::uint32_t{c[0]} << 16 | std::uint32_t{c[1]} << 8 | c[2]; }

}  // namespace

Palette Palette::standard() {
  Palette p;
  p.names = {"imp_surf", "building", "low_veg", "tree", "car", "clutter"};
  p.colors = {Rgb{255, 255, 255}, Rgb{0, 0, 255}, Rgb{0, 255, 255}, Rgb{0, 255, 0}, Rgb{255, 255, 0}, Rgb{255, 0, 0}};
  return p;
}

std::optional<std::uint8_t> Palette::lookup(const Rgb& c) const {
  for (std::size_t i = 0; i < colors.size(); ++i)
    if (colors[i] == c) return static_cast<std::uint8_t>(i);
  if (c == ignore_color) return kIgnoreLabel;
  return std::nullopt;
}

void Palette::check() const {
  if (colors.empty()) throw ValidationError("palette has no classes");
  if (colors.size() >= kIgnoreLabel) throw ValidationError("palette has more than 254 classes");
  if (!names.empty() && names.size() != colors.size()) throw ValidationError("palette names and colors differ in count");
  std::set<std::uint32_t> seen{pack(ignore_color)};
  for (std::size_t i = 0; i < colors.size(); ++i) {
    if (!seen.insert(pack(colors[i])).second) {
      throw ValidationError("palette color " + color_text(colors[i]) + " of class " + std::to_string(i) +
                            " is already in use");
    }
  }
  std::set<std::string> names_seen;
  for (const auto& n : names)
    if (!names_seen.insert(n).second) throw ValidationError("palette class name '" + n + "' repeated");
}

Palette parse_palette(const std::string& spec) {
  Palette p;
  std::stringstream entries(spec);
  for (std::string entry; std::getline(entries, entry, ';');) {
    boost::algorithm::trim(entry);
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    if (colon == std::string::npos || colon == 0) throw ValidationError("palette entry '" + entry + "' needs name:r,g,b");
    std::stringstream rgb(entry.substr(colon + 1));
    Rgb c{};
    int k = 0;
    for (std::string part; std::getline(rgb, part, ',');) {
      boost::algorithm::trim(part);
      std::size_t used = 0;
      int v = -1;
      try {
        v = std::stoi(part, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (k >= 3 || used != part.size() || v < 0 || v > 255) {
        throw ValidationError("palette entry '" + entry + "' has a bad color component '" + part + "'");
      }
      c[static_cast<std::size_t>(k++)] = static_cast<std::uint8_t>(v);
    }
    if (k != 3) throw ValidationError("palette entry '" + entry + "' needs three color components");
    p.names.push_back(boost::algorithm::trim_copy(entry.substr(0, colon)));
    p.colors.push_back(c);
  }
  p.check();
  return p;
}

std::string format_palette(const Palette& p) {
  std::string out;
  for (std::size_t i = 0; i < p.colors.size(); ++i) {
    if (i) out += ';';
    out += (p.names.empty() ? "class" + std::to_string(i) : p.names[i]) + ":" + std::to_string(p.colors[i][0]) + "," +
           std::to_string(p.colors[i][1]) + "," + std::to_string(p.colors[i][2]);
  }
  return out;
}

RasterImage encode_labels(const RasterImage& classes, const Palette& palette) {
  classes.check();
  palette.check();
  if (classes.type != PixelType::kU8 || classes.channels != 1) throw DimensionError("encode_labels needs a u8 class map");
  auto out = RasterImage::make_u8(classes.width, classes.height, 3, RasterRole::kOther);
  const auto hw = static_cast<std::size_t>(classes.plane_size());
  for (std::size_t p = 0; p < hw; ++p) {
    const auto k = classes.u8[p];
    Rgb c;
    if (k == kIgnoreLabel) {
      c = palette.ignore_color;
    } else if (k < palette.size()) {
      c = palette.colors[k];
    } else {
      throw ValidationError("class " + std::to_string(k) + " at pixel (x " + std::to_string(p % classes.width) +
                            ", y " + std::to_string(p / classes.width) + ") has no palette color");
    }
    for (std::size_t ch = 0; ch < 3; ++ch) out.u8[ch * hw + p] = c[ch];
  }
  return out;
}

RasterImage decode_labels(const RasterImage& colors, const Palette& palette) {
  colors.check();
  palette.check();
  if (colors.type != PixelType::kU8 || colors.channels != 3) {
    throw DimensionError("decode_labels needs a three-channel u8 raster");
  }
  std::map<std::uint32_t, std::uint8_t> table;
  for (std::size_t i = 0; i < palette.size(); ++i) table[pack(palette.colors[i])] = static_cast<std::uint8_t>(i);
  table[pack(palette.ignore_color)] = kIgnoreLabel;
  auto out = RasterImage::make_u8(colors.width, colors.height, 1, RasterRole::kLabel);
  const auto hw = static_cast<std::size_t>(colors.plane_size());
  std::size_t unknown = 0, first = 0;
  for (std::size_t p = 0; p < hw; ++p) {
    const Rgb c{colors.u8[p], colors.u8[hw + p], colors.u8[2 * hw + p]};
    const auto it = table.find(pack(c));
    if (it == table.end()) {
      if (unknown++ == 0) first = p;
      continue;
    }
    out.u8[p] = it->second;
  }
  if (unknown > 0) {
    const Rgb c{colors.u8[first], colors.u8[hw + first], colors.u8[2 * hw + first]};
    throw ValidationError("unknown label color " + color_text(c) + " at pixel (x " +
                          std::to_string(first % static_cast<std::size_t>(colors.width)) + ", y " +
                          std::to_string(first / static_cast<std::size_t>(colors.width)) + ")" +
                          (unknown > 1 ? "; " + std::to_string(unknown - 1) + " more pixels unmatched" : ""));
  }
  return out;
}

}  // namespace afnet::geo
