#include "afnet/train/data.hpp"

#include "afnet/geo/dihedral.hpp"

namespace afnet::train {

void Sample::check() const {
  const std::int64_t hw = h * w;
  if (h < 1 || w < 1) throw DimensionError("sample has empty extent");
  if (static_cast<std::int64_t>(image.size()) != image_channels * hw ||
      static_cast<std::int64_t>(aux.size()) != aux_channels * hw || static_cast<std::int64_t>(label.size()) != hw) {
    throw DimensionError("sample buffers do not match " + std::to_string(h) + "x" + std::to_string(w));
  }
}

namespace {

template <typename F>
Sample transform(const Sample& s, F&& planes_fn, std::int64_t out_h, std::int64_t out_w) {
  Sample out;
  out.h = out_h;
  out.w = out_w;
  out.image_channels = s.image_channels;
  out.aux_channels = s.aux_channels;
  out.image = planes_fn(s.image, s.image_channels);
  out.aux = planes_fn(s.aux, s.aux_channels);
  out.label = planes_fn(s.label, std::int64_t{1});
  return out;
}

}  // namespace

Sample hflip(const Sample& s) {
  return transform(
      s, [&](const auto& v, std::int64_t c) { return geo::flip_planes(v, c, s.h, s.w, true); }, s.h, s.w);
}

Sample vflip(const Sample& s) {
  return transform(
      s, [&](const auto& v, std::int64_t c) { return geo::flip_planes(v, c, s.h, s.w, false); }, s.h, s.w);
}

Sample rotate90(const Sample& s, int quarter_turns) {
  const geo::Dihedral d{false, ((quarter_turns % 4) + 4) % 4};
  const bool swap = d.quarter_turns % 2 == 1;
  return transform(
      s, [&](const auto& v, std::int64_t c) { return geo::apply_dihedral(v, c, s.h, s.w, d); }, swap ? s.w : s.h,
      swap ? s.h : s.w);
}

Sample crop(const Sample& s, std::int64_t top, std::int64_t left, std::int64_t size) {
  if (size < 1 || top < 0 || left < 0 || top + size > s.h || left + size > s.w) {
    throw ContractError("crop " + std::to_string(size) + " at (" + std::to_string(top) + ", " + std::to_string(left) +
                        ") does not fit a " + std::to_string(s.h) + "x" + std::to_string(s.w) + " slice");
  }
  auto cut = [&](const auto& v, std::int64_t c) {
    std::decay_t<decltype(v)> out(static_cast<std::size_t>(c * size * size));
    for (std::int64_t p = 0; p < c; ++p)
      for (std::int64_t y = 0; y < size; ++y)
        for (std::int64_t x = 0; x < size; ++x)
          out[(p * size + y) * size + x] = v[(p * s.h + top + y) * s.w + left + x];
    return out;
  };
  return transform(s, cut, size, size);
}

Sample augment(const Sample& sample, std::mt19937_64& rng, const AugmentConfig& cfg) {
  sample.check();
  const std::int64_t extent = std::min(sample.h, sample.w);
  if (cfg.crop > extent) {
    throw ContractError("crop size " + std::to_string(cfg.crop) + " exceeds slice size " + std::to_string(extent));
  }
  if (cfg.rotate90 && sample.h != sample.w) throw ContractError("90 degree rotation needs square slices");
  std::bernoulli_distribution coin(0.5);
  Sample s = sample;
  if (cfg.hflip && coin(rng)) s = hflip(s);
  if (cfg.vflip && coin(rng)) s = vflip(s);
  if (cfg.rotate90) {
    const int k = std::uniform_int_distribution<int>(0, 3)(rng);
    if (k != 0) s = rotate90(s, k);
  }
  if (cfg.crop > 0 && (cfg.crop < s.h || cfg.crop < s.w)) {
    const auto top = std::uniform_int_distribution<std::int64_t>(0, s.h - cfg.crop)(rng);
    const auto left = std::uniform_int_distribution<std::int64_t>(0, s.w - cfg.crop)(rng);
    s = crop(s, top, left, cfg.crop);
  }
  return s;
}

template <typename T>
Batch<T> make_batch(const std::vector<const Sample*>& samples) {
  if (samples.empty()) throw ContractError("make_batch needs at least one sample");
  const Sample& first = *samples.front();
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  const std::int64_t hw = first.h * first.w;
  std::vector<T> image, aux;
  image.reserve(static_cast<std::size_t>(n * first.image_channels * hw));
  aux.reserve(static_cast<std::size_t>(n * first.aux_channels * hw));
  LabelMap labels(n, first.h, first.w);
  for (std::int64_t i = 0; i < n; ++i) {
    const Sample& s = *samples[static_cast<std::size_t>(i)];
    s.check();
    if (s.h != first.h || s.w != first.w || s.image_channels != first.image_channels ||
        s.aux_channels != first.aux_channels) {
      throw DimensionError("make_batch: sample " + std::to_string(i) + " differs in geometry from sample 0");
    }
    image.insert(image.end(), s.image.begin(), s.image.end());
    aux.insert(aux.end(), s.aux.begin(), s.aux.end());
    std::copy(s.label.begin(), s.label.end(), labels.values.begin() + i * hw);
  }
  Batch<T> b;
  b.image = Tensor<T>::from_data({n, first.image_channels, first.h, first.w}, std::move(image));
  if (first.aux_channels > 0) b.aux = Tensor<T>::from_data({n, first.aux_channels, first.h, first.w}, std::move(aux));
  b.labels = std::move(labels);
  return b;
}

template Batch<float> make_batch(const std::vector<const Sample*>&);
template Batch<double> make_batch(const std::vector<const Sample*>&);

}  // namespace afnet::train
