#pragma once

// Root streams to pixel hit counts, and hit counts to images.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rootdensity::raster {

struct Viewport {
  double x_min = -2, x_max = 2;
  double y_min = -2, y_max = 2;
  std::uint32_t width = 512, height = 512;

  void validate() const;
};

struct Pixel {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Half-open mapping: re in [x_min, x_max), im in (y_min, y_max]. Row 0 is
/// the top of the image (largest imaginary part). Returns nullopt when the
/// point is outside the viewport or not finite.
std::optional<Pixel> root_to_pixel(const Viewport& v, std::complex<double> z);

/// Saturating u32 hit counts plus stream accounting.
class DensityGrid {
 public:
  static constexpr std::uint32_t kMaxCount = UINT32_MAX;

  DensityGrid(std::uint32_t width, std::uint32_t height);
  explicit DensityGrid(const Viewport& v) : DensityGrid(v.width, v.height) {}

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::span<const std::uint32_t> counts() const noexcept { return counts_; }
  std::uint32_t at(std::uint32_t x, std::uint32_t y) const { return counts_[index(x, y)]; }
  void set(std::uint32_t x, std::uint32_t y, std::uint32_t value) { counts_[index(x, y)] = value; }

  /// Roots that landed inside the viewport (not reduced by saturation).
  std::uint64_t in_view() const noexcept { return in_view_; }
  /// Roots outside the viewport or non-finite.
  std::uint64_t dropped() const noexcept { return dropped_; }
  std::uint64_t total() const noexcept { return in_view_ + dropped_; }
  std::uint32_t max_count() const noexcept;

  void hit(Pixel p);
  void drop(std::uint64_t n = 1) noexcept { dropped_ += n; }

  friend bool operator==(const DensityGrid&, const DensityGrid&) = default;

  friend DensityGrid merge(const DensityGrid& a, const DensityGrid& b);
  void merge_from(const DensityGrid& other);

 private:
  std::size_t index(std::uint32_t x, std::uint32_t y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<std::uint32_t> counts_;
  std::uint64_t in_view_ = 0;
  std::uint64_t dropped_ = 0;
};

void accumulate(DensityGrid& g, const Viewport& v, std::span<const std::complex<double>> roots);
void accumulate(DensityGrid& g, const Viewport& v, std::span<const std::complex<float>> roots);

/// Per-pixel saturating sum; throws DimensionMismatch on differing sizes.
DensityGrid merge(const DensityGrid& a, const DensityGrid& b);

enum class ToneMode { kLinear, kLog1p };
enum class Palette { kGrayscale, kFire, kIce };

struct ToneMap {
  ToneMode mode = ToneMode::kLog1p;
  double gamma = 1.0;
  Palette palette = Palette::kGrayscale;

  void validate() const;
};

struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  /// 1 for grayscale, 3 for RGB.
  std::uint32_t channels = 1;
  std::vector<std::uint8_t> pixels;
};

/// Intensity in [0, 1] for a count given the grid maximum.
double tone_intensity(const ToneMap& t, std::uint32_t count, std::uint32_t max_count);

Image render(const DensityGrid& g, const ToneMap& t);

/// Binary PGM (P5) for one channel, PPM (P6) for three; maxval 255.
std::string encode_image(const Image& img);
void write_image(const Image& img, const std::string& path);

struct GridStats {
  std::uint64_t total_roots = 0;
  std::uint64_t in_view = 0;
  std::uint64_t dropped = 0;
  std::uint32_t max_count = 0;
};

GridStats stats(const DensityGrid& g);
/// key=value lines; extra lines are appended verbatim.
std::string format_stats(const GridStats& s, const std::vector<std::string>& extra = {});

ToneMode parse_tone_mode(const std::string& s);
Palette parse_palette(const std::string& s);

}  // namespace rootdensity::raster
