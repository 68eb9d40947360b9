#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "rootdensity/errors.hpp"
#include "rootdensity/raster.hpp"
#include "support.hpp"

using namespace rootdensity;
using namespace rootdensity::raster;
using cd = std::complex<double>;

#ifndef RD_TEST_DATA
#define RD_TEST_DATA "."
#endif

TEST_CASE("root_to_pixel") {
  Viewport v;
  v.width = v.height = 4;
  CHECK(root_to_pixel(v, cd(0)) == Pixel{2, 2});
  CHECK_FALSE(root_to_pixel(v, cd(2, 0)).has_value());
  CHECK_FALSE(root_to_pixel(v, cd(0, -2)).has_value());
  CHECK(root_to_pixel(v, cd(-2, 2)) == Pixel{0, 0});
  CHECK_FALSE(root_to_pixel(v, cd(std::nan(""), 0)).has_value());
  CHECK_FALSE(root_to_pixel(v, cd(INFINITY, 0)).has_value());

  Viewport unit{0, 1, 0, 1, 10, 10};
  CHECK(root_to_pixel(unit, cd(0.05, 0.95)) == Pixel{0, 0});
  CHECK(root_to_pixel(unit, cd(0.95, 0.05)) == Pixel{9, 9});
  CHECK(root_to_pixel(unit, cd(std::nextafter(1.0, 0.0), std::nextafter(0.0, 1.0))) == Pixel{9, 9});
}

TEST_CASE("viewport validation") {
  CHECK_THROWS_AS((Viewport{1, 0, 0, 1, 4, 4}).validate(), ConfigError);
  CHECK_THROWS_AS((Viewport{0, 1, 0, 1, 0, 4}).validate(), ConfigError);
  CHECK_THROWS_AS((Viewport{0, 1, 0, NAN, 4, 4}).validate(), ConfigError);
}

TEST_CASE("accumulate and saturation") {
  Viewport v{-2, 2, -2, 2, 8, 8};
  DensityGrid g(v);
  accumulate(g, v, std::span<const cd>{});
  CHECK(g == DensityGrid(v));
  const std::vector<cd> same(5, cd(0.1, 0.1));
  accumulate(g, v, same);
  const auto px = *root_to_pixel(v, cd(0.1, 0.1));
  CHECK(g.at(px.x, px.y) == 5);
  accumulate(g, v, std::vector<cd>{cd(5, 0), cd(NAN, 0)});
  CHECK(g.in_view() == 5);
  CHECK(g.dropped() == 2);
  g.set(0, 0, std::numeric_limits<std::uint32_t>::max());
  g.hit(Pixel{0, 0});
  CHECK(g.at(0, 0) == std::numeric_limits<std::uint32_t>::max());
  CHECK(g.in_view() == 6);
}

TEST_CASE("merge properties") {
  Viewport v{-2, 2, -2, 2, 32, 16};
  std::mt19937_64 rng(61);
  std::vector<cd> roots(5000);
  for (auto& z : roots) z = rdtest::uniform_in_disk(rng, 2.5);
  DensityGrid whole(v);
  accumulate(whole, v, roots);
  CHECK(whole.in_view() + whole.dropped() == roots.size());

  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> cut(0, roots.size());
    std::size_t a = cut(rng), b = cut(rng);
    if (a > b) std::swap(a, b);
    DensityGrid g1(v), g2(v), g3(v);
    const std::span<const cd> all(roots);
    accumulate(g1, v, all.subspan(0, a));
    accumulate(g2, v, all.subspan(a, b - a));
    accumulate(g3, v, all.subspan(b));
    CHECK(merge(merge(g1, g2), g3) == whole);
    CHECK(merge(g1, merge(g2, g3)) == whole);
    CHECK(merge(g1, g2) == merge(g2, g1));
  }
  CHECK(merge(whole, DensityGrid(v)) == whole);
  CHECK_THROWS_AS(merge(whole, DensityGrid(16, 32)), DimensionMismatch);

  DensityGrid hot(1, 1), hot2(1, 1);
  hot.set(0, 0, std::numeric_limits<std::uint32_t>::max() - 1);
  hot2.set(0, 0, 5);
  CHECK(merge(hot, hot2).at(0, 0) == std::numeric_limits<std::uint32_t>::max());
}

TEST_CASE("render normalization") {
  DensityGrid zero(4, 3);
  const auto black = render(zero, ToneMap{});
  CHECK(black.pixels == std::vector<std::uint8_t>(12, 0));

  DensityGrid one(4, 3);
  one.set(1, 2, 7);
  const auto img = render(one, ToneMap{});
  for (std::size_t k = 0; k < img.pixels.size(); ++k) {
    CHECK(img.pixels[k] == (k == 2 * 4 + 1 ? 255 : 0));
  }

  const ToneMap log{ToneMode::kLog1p, 1.0, Palette::kGrayscale};
  const double i1 = tone_intensity(log, 1, 100);
  const double i10 = tone_intensity(log, 10, 100);
  const double i100 = tone_intensity(log, 100, 100);
  CHECK(i1 < i10);
  CHECK(i10 < i100);
  CHECK(i100 == 1.0);
}

TEST_CASE("tone map monotonicity") {
  for (auto mode : {ToneMode::kLinear, ToneMode::kLog1p}) {
    for (double gamma : {0.5, 1.0, 2.2}) {
      const ToneMap t{mode, gamma, Palette::kGrayscale};
      double prev = -1;
      for (std::uint32_t c = 0; c <= 1000; ++c) {
        const double x = tone_intensity(t, c, 1000);
        CHECK(x > prev);
        prev = x;
      }
    }
  }
  CHECK_THROWS_AS((ToneMap{ToneMode::kLinear, 0.0, Palette::kGrayscale}).validate(), ConfigError);
}

TEST_CASE("PGM and PPM encoding") {
  const Image black{1, 1, 1, {0}};
  CHECK(encode_image(black) == std::string("P5\n1 1\n255\n\0", 12));
  const Image pair{2, 1, 1, {0, 255}};
  CHECK(encode_image(pair) == std::string("P5\n2 1\n255\n\x00\xff", 13));
  const Image rgb{1, 1, 3, {1, 2, 3}};
  CHECK(encode_image(rgb) == std::string("P6\n1 1\n255\n\x01\x02\x03", 14));
  CHECK_THROWS_AS(encode_image(Image{2, 2, 1, {0}}), DimensionMismatch);

  DensityGrid g(2, 1);
  g.set(1, 0, 3);
  const auto fire = render(g, ToneMap{ToneMode::kLinear, 1.0, Palette::kFire});
  CHECK(fire.channels == 3);
  CHECK(fire.pixels == std::vector<std::uint8_t>{0, 0, 0, 255, 255, 255});
}

namespace {

DensityGrid golden_grid(const Viewport& v) {
  // Roots of z^k = 1 for k = 1..40, plus a spiral.
  DensityGrid g(v);
  std::vector<cd> pts;
  for (int k = 1; k <= 40; ++k) {
    for (int j = 0; j < k; ++j) pts.push_back(std::polar(1.0, 2 * std::numbers::pi * j / k));
  }
  for (int j = 0; j < 2000; ++j) pts.push_back(std::polar(j / 1000.0, j * 0.05));
  accumulate(g, v, pts);
  return g;
}

}  // namespace

TEST_CASE("golden 64x64 image") {
  const Viewport v{-2, 2, -2, 2, 64, 64};
  const auto bytes = encode_image(render(golden_grid(v), ToneMap{}));
  CHECK(bytes == encode_image(render(golden_grid(v), ToneMap{})));
  const std::string golden = std::string(RD_TEST_DATA) + "/golden_64.pgm";
  std::ifstream in(golden, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << golden);
  const std::string expect{std::istreambuf_iterator<char>(in), {}};
  CHECK(bytes == expect);
}

TEST_CASE("stats side-car") {
  Viewport v{-1, 1, -1, 1, 4, 4};
  DensityGrid g(v);
  accumulate(g, v, std::vector<cd>{cd(0), cd(0), cd(3)});
  const auto s = stats(g);
  CHECK(format_stats(s, {"samples=1"}) ==
        "total_roots=3\nin_view=2\ndropped=1\nmax_count=2\nsamples=1\n");
}

TEST_CASE("parsers") {
  CHECK(parse_tone_mode("linear") == ToneMode::kLinear);
  CHECK(parse_palette("gray") == Palette::kGrayscale);
  CHECK(parse_palette("ice") == Palette::kIce);
  CHECK_THROWS_AS(parse_palette("rainbow"), ConfigError);
}
