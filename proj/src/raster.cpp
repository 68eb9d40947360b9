#include "rootdensity/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "rootdensity/errors.hpp"

namespace rootdensity::raster {

void Viewport::validate() const {
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
        std::isfinite(y_max))) {
    throw ConfigError("viewport bounds must be finite");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ConfigError("viewport requires x_min < x_max and y_min < y_max");
  }
  if (width < 1 || height < 1) throw ConfigError("viewport size must be at least 1x1");
}

std::optional<Pixel> root_to_pixel(const Viewport& v, std::complex<double> z) {
  const double re = z.real(), im = z.imag();
  if (!(re >= v.x_min && re < v.x_max && im > v.y_min && im <= v.y_max)) return std::nullopt;
  const double fx = (re - v.x_min) / (v.x_max - v.x_min) * v.width;
  const double fy = (v.y_max - im) / (v.y_max - v.y_min) * v.height;
  // Rounding can push a point just inside the open edge onto width/height.
  const auto px = std::min<std::uint32_t>(static_cast<std::uint32_t>(std::floor(fx)), v.width - 1);
  const auto py = std::min<std::uint32_t>(static_cast<std::uint32_t>(std::floor(fy)), v.height - 1);
  return Pixel{px, py};
}

DensityGrid::DensityGrid(std::uint32_t width, std::uint32_t height)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ConfigError("density grid must be at least 1x1");
  counts_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::uint32_t DensityGrid::max_count() const noexcept {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

void DensityGrid::hit(Pixel p) {
  auto& c = counts_[index(p.x, p.y)];
  if (c != kMaxCount) ++c;
  ++in_view_;
}

void DensityGrid::merge_from(const DensityGrid& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw DimensionMismatch("cannot merge grids of different dimensions");
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    const std::uint64_t sum = std::uint64_t{counts_[k]} + other.counts_[k];
    counts_[k] = static_cast<std::uint32_t>(std::min<std::uint64_t>(sum, kMaxCount));
  }
  in_view_ += other.in_view_;
  dropped_ += other.dropped_;
}

DensityGrid merge(const DensityGrid& a, const DensityGrid& b) {
  DensityGrid out = a;
  out.merge_from(b);
  return out;
}

namespace {

template <typename T>
void accumulate_impl(DensityGrid& g, const Viewport& v, std::span<const std::complex<T>> roots) {
  if (g.width() != v.width || g.height() != v.height) {
    throw DimensionMismatch("grid does not match viewport");
  }
  for (const auto& z : roots) {
    const auto px = root_to_pixel(v, {static_cast<double>(z.real()), static_cast<double>(z.imag())});
    if (px) {
      g.hit(*px);
    } else {
      g.drop();
    }
  }
}

}  // namespace

void accumulate(DensityGrid& g, const Viewport& v, std::span<const std::complex<double>> roots) {
  accumulate_impl(g, v, roots);
}

void accumulate(DensityGrid& g, const Viewport& v, std::span<const std::complex<float>> roots) {
  accumulate_impl(g, v, roots);
}

void ToneMap::validate() const {
  if (!(gamma > 0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
}

double tone_intensity(const ToneMap& t, std::uint32_t count, std::uint32_t max_count) {
  if (count == 0 || max_count == 0) return 0.0;
  double x = 0;
  if (t.mode == ToneMode::kLinear) {
    x = static_cast<double>(count) / max_count;
  } else {
    x = std::log1p(static_cast<double>(count)) / std::log1p(static_cast<double>(max_count));
  }
  x = std::clamp(x, 0.0, 1.0);
  return t.gamma == 1.0 ? x : std::pow(x, 1.0 / t.gamma);
}

namespace {

using Rgb = std::array<double, 3>;

// Piecewise-linear gradients, stops evenly spaced over [0, 1].
Rgb gradient(Palette p, double x) {
  static constexpr std::array<Rgb, 5> kFire{{{0, 0, 0}, {0.5, 0, 0.1}, {0.9, 0.25, 0}, {1, 0.8, 0.1}, {1, 1, 1}}};
  static constexpr std::array<Rgb, 5> kIce{{{0, 0, 0}, {0, 0.1, 0.4}, {0, 0.45, 0.8}, {0.4, 0.85, 1}, {1, 1, 1}}};
  const auto& stops = p == Palette::kFire ? kFire : kIce;
  const double pos = x * (stops.size() - 1);
  const auto lo = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const double f = pos - lo;
  Rgb out{};
  for (int c = 0; c < 3; ++c) out[c] = stops[lo][c] * (1 - f) + stops[lo + 1][c] * f;
  return out;
}

std::uint8_t quantize(double x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

}  // namespace

Image render(const DensityGrid& g, const ToneMap& t) {
  t.validate();
  Image img;
  img.width = g.width();
  img.height = g.height();
  img.channels = t.palette == Palette::kGrayscale ? 1 : 3;
  img.pixels.reserve(static_cast<std::size_t>(img.width) * img.height * img.channels);
  const std::uint32_t max_count = g.max_count();
  for (const auto c : g.counts()) {
    const double x = tone_intensity(t, c, max_count);
    if (img.channels == 1) {
      img.pixels.push_back(quantize(x));
    } else {
      for (double v : gradient(t.palette, x)) img.pixels.push_back(quantize(v));
    }
  }
  return img;
}

std::string encode_image(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ConfigError("image must have 1 or 3 channels");
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * img.channels) {
    throw DimensionMismatch("image buffer size does not match dimensions");
  }
  std::string out = img.channels == 1 ? "P5\n" : "P6\n";
  out += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

void write_image(const Image& img, const std::string& path) {
  const std::string bytes = encode_image(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path);
}

GridStats stats(const DensityGrid& g) {
  return {g.total(), g.in_view(), g.dropped(), g.max_count()};
}

std::string format_stats(const GridStats& s, const std::vector<std::string>& extra) {
  std::string out;
  out += "total_roots=" + std::to_string(s.total_roots) + "\n";
  out += "in_view=" + std::to_string(s.in_view) + "\n";
  out += "dropped=" + std::to_string(s.dropped) + "\n";
  out += "max_count=" + std::to_string(s.max_count) + "\n";
  for (const auto& line : extra) out += line + "\n";
  return out;
}

ToneMode parse_tone_mode(const std::string& s) {
  if (s == "linear") return ToneMode::kLinear;
  if (s == "log1p") return ToneMode::kLog1p;
  throw ConfigError("unknown tone mode '" + s + "' (expected linear or log1p)");
}

Palette parse_palette(const std::string& s) {
  if (s == "gray" || s == "grayscale") return Palette::kGrayscale;
  if (s == "fire") return Palette::kFire;
  if (s == "ice") return Palette::kIce;
  throw ConfigError("unknown palette '" + s + "' (expected grayscale, fire or ice)");
}

}  // namespace rootdensity::raster
