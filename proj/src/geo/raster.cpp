#include "afnet/geo/raster.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "afnet/core/errors.hpp"
#include "afnet/core/tensor_io.hpp"

namespace afnet::geo {

std::string to_string(PixelType t) { return t == PixelType::kU8 ? "u8" : "f32"; }

std::string to_string(RasterRole r) {
  switch (r) {
    case RasterRole::kOptical: return "optical";
    case RasterRole::kDsm: return "dsm";
    case RasterRole::kNdvi: return "ndvi";
    case RasterRole::kLabel: return "label";
    case RasterRole::kProbability: return "probability";
    case RasterRole::kOther: break;
  }
  return "other";
}

RasterImage RasterImage::make_u8(std::int64_t width, std::int64_t height, std::int64_t channels, RasterRole role,
                                 std::uint8_t fill) {
  RasterImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.type = PixelType::kU8;
  img.role = role;
  img.u8.assign(static_cast<std::size_t>(width * height * channels), fill);
  return img;
}

RasterImage RasterImage::make_f32(std::int64_t width, std::int64_t height, std::int64_t channels, RasterRole role,
                                  float fill) {
  RasterImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.type = PixelType::kF32;
  img.role = role;
  img.f32.assign(static_cast<std::size_t>(width * height * channels), fill);
  return img;
}

float RasterImage::value(std::int64_t c, std::int64_t y, std::int64_t x) const {
  const auto i = index(c, y, x);
  return type == PixelType::kU8 ? static_cast<float>(u8[i]) : f32[i];
}

std::vector<float> RasterImage::as_float() const {
  if (type == PixelType::kF32) return f32;
  return std::vector<float>(u8.begin(), u8.end());
}

void RasterImage::check() const {
  if (width < 1 || height < 1 || channels < 1) {
    throw DimensionError("raster has empty extent " + std::to_string(width) + "x" + std::to_string(height) + "x" +
                         std::to_string(channels));
  }
  const auto expected = static_cast<std::size_t>(element_count());
  const bool ok = type == PixelType::kU8 ? (u8.size() == expected && f32.empty())
                                         : (f32.size() == expected && u8.empty());
  if (!ok) throw DimensionError("raster buffer does not match " + std::to_string(width) + "x" +
                                std::to_string(height) + "x" + std::to_string(channels) + " " + to_string(type));
  if (role == RasterRole::kLabel && (type != PixelType::kU8 || channels != 1)) {
    throw DimensionError("label rasters must be single-channel u8");
  }
}

LabelMap to_label_map(const RasterImage& img) {
  img.check();
  if (img.type != PixelType::kU8 || img.channels != 1) throw DimensionError("label map needs a single-channel u8 raster");
  LabelMap out;
  out.n = 1;
  out.h = img.height;
  out.w = img.width;
  out.values = img.u8;
  return out;
}

RasterImage from_label_map(const LabelMap& labels, std::int64_t index) {
  if (index < 0 || index >= labels.n) throw ContractError("label map index out of range");
  auto img = RasterImage::make_u8(labels.w, labels.h, 1, RasterRole::kLabel);
  const auto hw = labels.h * labels.w;
  std::copy(labels.values.begin() + index * hw, labels.values.begin() + (index + 1) * hw, img.u8.begin());
  return img;
}

namespace {

void write_pnm(std::ostream& os, const RasterImage& img) {
  os << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  const auto hw = img.plane_size();
  std::vector<char> payload(static_cast<std::size_t>(img.element_count()));
  for (std::int64_t p = 0; p < hw; ++p)
    for (std::int64_t c = 0; c < img.channels; ++c)
      payload[static_cast<std::size_t>(p * img.channels + c)] = static_cast<char>(img.u8[static_cast<std::size_t>(c * hw + p)]);
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

class PnmReader {
 public:
  explicit PnmReader(const std::string& bytes) : bytes_(bytes) {}

  RasterImage read(RasterRole role) {
    const std::int64_t channels = bytes_[1] == '5' ? 1 : 3;
    pos_ = 2;
    const auto width = number("width");
    const auto height = number("height");
    const auto maxval_at = pos_;
    const auto maxval = number("maxval");
    if (width < 1 || height < 1) throw ParseError("zero raster extent at byte offset " + std::to_string(maxval_at));
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw ParseError("expected one whitespace byte after maxval at byte offset " + std::to_string(pos_));
    }
    if (maxval != 255) {
      throw FormatError("unsupported maxval " + std::to_string(maxval) + " (only 255) near byte offset " +
                        std::to_string(maxval_at));
    }
    ++pos_;
    const auto count = static_cast<std::size_t>(width * height * channels);
    if (bytes_.size() - pos_ < count) {
      throw ParseError("truncated pixel data at byte offset " + std::to_string(pos_) + ": expected " +
                       std::to_string(count) + " bytes, found " + std::to_string(bytes_.size() - pos_));
    }
    auto img = RasterImage::make_u8(width, height, channels, role);
    const auto hw = width * height;
    for (std::int64_t p = 0; p < hw; ++p)
      for (std::int64_t c = 0; c < channels; ++c)
        img.u8[static_cast<std::size_t>(c * hw + p)] =
            static_cast<std::uint8_t>(bytes_[pos_ + static_cast<std::size_t>(p * channels + c)]);
    return img;
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::int64_t number(const char* what) {
    const auto before = pos_;
    skip_separators();
    if (pos_ == before) throw ParseError(std::string("expected whitespace before ") + what + " at byte offset " + std::to_string(pos_));
    if (pos_ >= bytes_.size() || bytes_[pos_] < '0' || bytes_[pos_] > '9') {
      throw ParseError(std::string("expected ") + what + " at byte offset " + std::to_string(pos_));
    }
    std::int64_t v = 0;
    const auto start = pos_;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (std::int64_t{1} << 24)) throw ParseError(std::string(what) + " too large at byte offset " + std::to_string(start));
      ++pos_;
    }
    return v;
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_raster(std::ostream& os, const RasterImage& img) {
  img.check();
  if (img.type == PixelType::kU8) {
    if (img.channels != 1 && img.channels != 3) {
      throw FormatError("u8 rasters are written as PGM or PPM; " + std::to_string(img.channels) +
                        " channels is neither");
    }
    write_pnm(os, img);
  } else {
    write_raw_tensor(os, {img.channels, img.height, img.width}, img.f32);
  }
  if (!os) throw IoError("failed writing raster");
}

void write_raster(const std::filesystem::path& path, const RasterImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_raster(os, img);
}

RasterImage read_raster(std::istream& is, RasterRole role) {
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return PnmReader(bytes).read(role);
  }
  if (bytes.size() >= 4 && bytes.compare(0, 4, "AFT1") == 0) {
    std::istringstream in(bytes);
    RawTensor raw = read_raw_tensor(in);
    if (raw.shape.size() == 2) raw.shape.insert(raw.shape.begin(), 1);
    if (raw.shape.size() != 3 || raw.values.empty()) {
      throw ParseError("raster tensor must have rank 2 or 3 and be non-empty (byte offset 4)");
    }
    RasterImage img;
    img.channels = raw.shape[0];
    img.height = raw.shape[1];
    img.width = raw.shape[2];
    img.type = PixelType::kF32;
    img.role = role;
    img.f32 = std::move(raw.values);
    return img;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    throw FormatError(std::string("unsupported netpbm variant P") + bytes[1] + " at byte offset 0");
  }
  throw ParseError("unrecognized raster magic at byte offset 0");
}

RasterImage read_raster(const std::filesystem::path& path, RasterRole role) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_raster(is, role);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace afnet::geo
