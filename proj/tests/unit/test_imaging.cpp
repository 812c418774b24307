#include <cstdint>
#include <vector>

#include "doctest.h"
#include "robovis/error.hpp"
#include "robovis/imaging/filters.hpp"
#include "robovis/imaging/geometry.hpp"
#include "robovis/imaging/integral_image.hpp"
#include "robovis/imaging/pnm_io.hpp"
#include "robovis/random.hpp"
#include "support/textures.hpp"

using namespace robovis;

namespace {

std::int64_t brute_sum(const Image& img, int x0, int y0, int x1, int y1) {
  std::int64_t s = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) s += img.at(x, y);
  return s;
}

BoundingBox random_box(Rng& rng, int extent) {
  const int x0 = rng.range(0, extent - 2), y0 = rng.range(0, extent - 2);
  return {x0, y0, rng.range(x0 + 1, extent), rng.range(y0 + 1, extent)};
}

}  // namespace

TEST_CASE("integral image of zero and unit images") {
  const auto zero = IntegralImage::of(Image(4, 4, 0));
  for (int y = 0; y <= 4; ++y)
    for (int x = 0; x <= 4; ++x) CHECK(zero.at(x, y) == 0);

  const auto ones = IntegralImage::of(Image(4, 4, 1));
  CHECK(ones.at(4, 4) == 16);
  CHECK(ones.at(0, 3) == 0);
  CHECK(ones.at(3, 0) == 0);
  CHECK(ones.at(2, 3) == 6);
}

TEST_CASE("integral image matches brute-force sums at random coordinates") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = rng.range(1, 40), h = rng.range(1, 40);
    const Image img = testing::random_image(w, h, rng);
    const auto ii = IntegralImage::of(img);
    for (int k = 0; k < 500; ++k) {
      const int x = rng.range(0, w), y = rng.range(0, h);
      REQUIRE(ii.at(x, y) == brute_sum(img, 0, 0, x, y));
    }
    // monotone along rows and columns
    for (int y = 1; y <= h; ++y)
      for (int x = 1; x <= w; ++x) {
        CHECK(ii.at(x, y) >= ii.at(x - 1, y));
        CHECK(ii.at(x, y) >= ii.at(x, y - 1));
      }
  }
}

TEST_CASE("rect_sum") {
  SUBCASE("full window on all-ones image") {
    const auto ii = IntegralImage::of(Image(7, 5, 1));
    CHECK(ii.rect_sum(Window(0, 0, 7, 5)) == 35);
  }
  SUBCASE("zero-area windows are rejected at construction") {
    CHECK_THROWS_AS(Window(3, 3, 3, 5), InvalidArgument);
    CHECK_THROWS_AS(Window(3, 3, 5, 2), InvalidArgument);
  }
  SUBCASE("out of bounds") {
    const auto ii = IntegralImage::of(Image(7, 5, 1));
    CHECK_THROWS_AS(ii.rect_sum(Window(0, 0, 8, 5)), BoundsError);
    CHECK_THROWS_AS(ii.rect_sum(Window(-1, 0, 3, 5)), BoundsError);
  }
  SUBCASE("random windows match double-loop sums") {
    Rng rng(5);
    const Image img = testing::random_image(64, 64, rng);
    const auto ii = IntegralImage::of(img);
    for (int k = 0; k < 2000; ++k) {
      const BoundingBox b = random_box(rng, 64);
      REQUIRE(ii.rect_sum(Window(b)) == brute_sum(img, b.x_min, b.y_min, b.x_max, b.y_max));
    }
  }
  SUBCASE("64-bit accumulation on a saturated VGA frame") {
    const auto ii = IntegralImage::of(Image(640, 480, 255));
    CHECK(ii.rect_sum(Window(0, 0, 640, 480)) == 640LL * 480 * 255);
    const auto sq = IntegralImage::of_squares(Image(640, 480, 255));
    CHECK(sq.at(640, 480) == 640LL * 480 * 255 * 255);
  }
}

TEST_CASE("overlap_ratio examples") {
  const BoundingBox gt{0, 0, 10, 10};
  CHECK(overlap_ratio(gt, gt, false) == 1.0);
  CHECK(overlap_ratio(gt, gt, true) == 1.0);
  CHECK(overlap_ratio(gt, {5, 0, 15, 10}, false) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(overlap_ratio(gt, {0, 0, 20, 10}, true) == 1.0);
  CHECK(overlap_ratio(gt, {0, 0, 20, 10}, false) == 0.5);
  CHECK(overlap_ratio(gt, {10, 0, 20, 10}, false) == 0.0);
  CHECK(overlap_ratio(gt, {30, 30, 40, 40}, true) == 0.0);
}

TEST_CASE("overlap_ratio properties over random box pairs") {
  Rng rng(99);
  for (int k = 0; k < 20000; ++k) {
    const BoundingBox a = random_box(rng, 30), b = random_box(rng, 30);
    const double strict = overlap_ratio(a, b, false);
    const double relaxed = overlap_ratio(a, b, true);
    REQUIRE(strict == overlap_ratio(b, a, false));
    REQUIRE(relaxed >= strict);
    REQUIRE(strict >= 0.0);
    REQUIRE(relaxed <= 1.0);
    REQUIRE((strict == 1.0) == (a == b));
    REQUIRE((relaxed == 1.0) == b.contains(a));
  }
}

TEST_CASE("PGM encode/decode is bit-exact") {
  Rng rng(3);
  const Image img = testing::random_image(37, 23, rng);
  const std::string bytes = encode_pgm(img);
  CHECK(bytes.substr(0, 12) == "P5\n37 23\n255");
  const std::vector<std::uint8_t> raw(bytes.begin(), bytes.end());
  CHECK(decode_pnm(raw) == img);
}

TEST_CASE("PNM header parsing") {
  SUBCASE("comments and arbitrary whitespace") {
    const std::string s = "P5 # comment\n2\t# w\n 1\n255\n\x07\x09";
    const std::vector<std::uint8_t> raw(s.begin(), s.end());
    const Image img = decode_pnm(raw);
    CHECK(img.width() == 2);
    CHECK(img.at(0, 0) == 7);
    CHECK(img.at(1, 0) == 9);
  }
  SUBCASE("PPM is converted with Rec. 601 weights") {
    std::string s = "P6\n2 1\n255\n";
    s += std::string("\xff\x00\x00", 3);
    s += std::string("\x00\x00\xff", 3);
    const std::vector<std::uint8_t> raw(s.begin(), s.end());
    const Image img = decode_pnm(raw);
    CHECK(img.at(0, 0) == 76);  // 0.299 * 255 = 76.2
    CHECK(img.at(1, 0) == 29);  // 0.114 * 255 = 29.1
  }
  SUBCASE("errors") {
    for (std::string bad : {"P2\n1 1\n255\n0", "P5\n1 1\n65535\n00", "P5\n4 4\n255\nab", "P5\n"}) {
      const std::vector<std::uint8_t> raw(bad.begin(), bad.end());
      CHECK_THROWS_AS(decode_pnm(raw), FormatError);
    }
  }
}

TEST_CASE("filters") {
  SUBCASE("blur preserves a constant image") {
    ImageF f(20, 15, 0.25f);
    const ImageF g = gaussian_blur(f, 2.0);
    for (float v : g.pixels()) CHECK(v == doctest::Approx(0.25f).epsilon(1e-6));
  }
  SUBCASE("rotate90 moves (x,y) to (h-1-y,x)") {
    Rng rng(8);
    const Image img = testing::random_image(5, 3, rng);
    const Image r = rotate90_cw(img);
    CHECK(r.width() == 3);
    CHECK(r.height() == 5);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 5; ++x) CHECK(r.at(2 - y, x) == img.at(x, y));
  }
  SUBCASE("identity warp reproduces the source") {
    Rng rng(9);
    const Image img = testing::random_image(16, 12, rng);
    Image dst(16, 12);
    const auto covered = warp_affine_into(img, {1, 0, 0, 0, 1, 0}, dst);
    CHECK(dst == img);
    CHECK(std::all_of(covered.begin(), covered.end(), [](bool c) { return c; }));
  }
}
