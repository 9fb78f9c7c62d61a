#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "cropsight/error.hpp"
#include "cropsight/imaging.hpp"
#include "cropsight/rng.hpp"

using namespace cropsight;
using namespace cropsight::imaging;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

ErrorCode decode_error(const std::vector<std::uint8_t>& b) {
  try {
    load_image(b);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

// Hue from the atan2 form of the same model, used as a cross-check on the
// arccos formula.
double hue_atan2(const Rgb& p) {
  double h = std::atan2(std::sqrt(3.0) * (p.g - p.b), 2.0 * p.r - p.g - p.b) * 180.0 / std::numbers::pi;
  return h < 0 ? h + 360.0 : h;
}

// 3x2 RGB: red green blue / black white (128,64,32).
const std::vector<std::uint8_t> kPngRgb = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00, 0x02, 0x08, 0x02, 0x00, 0x00, 0x00, 0x12, 0x16, 0xf1,
    0x4d, 0x00, 0x00, 0x00, 0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0,
    0x00, 0xc3, 0x0c, 0xff, 0xff, 0xff, 0x6f, 0x70, 0x50, 0x00, 0x00, 0x3d, 0xf8, 0x06, 0xdb, 0x21,
    0x53, 0x0a, 0x59, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};

// 2x1 greyscale: 0, 200.
const std::vector<std::uint8_t> kPngGrey = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00, 0xd1,
    0x49, 0x20, 0x56, 0x00, 0x00, 0x00, 0x0b, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60,
    0x38, 0x01, 0x00, 0x00, 0xcb, 0x00, 0xc9, 0x69, 0xc8, 0xc3, 0x6c, 0x00, 0x00, 0x00, 0x00,
    0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};

}  // namespace

TEST_CASE("hsi of primaries and greys") {
  auto red = rgb_to_hsi(Rgb{1, 0, 0});
  CHECK(red.hue == doctest::Approx(0.0));
  CHECK(red.saturation == doctest::Approx(1.0));
  CHECK(red.intensity == doctest::Approx(1.0 / 3.0));
  CHECK(red.hue_defined);
  CHECK(rgb_to_hsi(Rgb{0, 1, 0}).hue == doctest::Approx(120.0));
  CHECK(rgb_to_hsi(Rgb{0, 0, 1}).hue == doctest::Approx(240.0));
  CHECK(rgb_to_hsi(Rgb{1, 1, 0}).hue == doctest::Approx(60.0));
  CHECK(rgb_to_hsi(Rgb{1, 0, 1}).hue == doctest::Approx(300.0));

  auto grey = rgb_to_hsi(Rgb{0.4, 0.4, 0.4});
  CHECK(grey.saturation == 0.0);
  CHECK(grey.hue == 0.0);
  CHECK_FALSE(grey.hue_defined);
  CHECK(grey.intensity == doctest::Approx(0.4));
  auto black = rgb_to_hsi(Rgb{0, 0, 0});
  CHECK(black.saturation == 0.0);
  CHECK_FALSE(black.hue_defined);
}

TEST_CASE("hsi agrees with the atan2 form and stays in range") {
  Rng rng(17);
  for (int i = 0; i < 20000; ++i) {
    Rgb p{rng.uniform(), rng.uniform(), rng.uniform()};
    auto h = rgb_to_hsi(p);
    CHECK(h.saturation >= 0.0);
    CHECK(h.saturation <= 1.0);
    CHECK(h.hue >= 0.0);
    CHECK(h.hue < 360.0);
    CHECK(h.intensity == doctest::Approx((p.r + p.g + p.b) / 3.0));
    double d = std::abs(h.hue - hue_atan2(p));
    CHECK(std::min(d, 360.0 - d) < 1e-6);
  }
}

TEST_CASE("plane conversion matches the pixel form") {
  RgbImage img(2, 1);
  img.data = {{0.2, 0.5, 0.1}, {0.3, 0.3, 0.3}};
  auto planes = rgb_to_hsi(img);
  auto p0 = rgb_to_hsi(img.data[0]);
  CHECK(planes.hue.data[0] == p0.hue);
  CHECK(planes.saturation.data[0] == p0.saturation);
  CHECK(planes.hue_defined.data[0] == 1);
  CHECK(planes.hue_defined.data[1] == 0);
}

TEST_CASE("binary and plain ppm decode") {
  auto p6 = bytes_of(std::string("P6\n# comment\n2 1\n255\n") + std::string("\xff\x00\x00\x00\x80\xff", 6));
  auto img = load_image(p6);
  REQUIRE(img.width == 2);
  REQUIRE(img.height == 1);
  CHECK(img.at(0, 0) == Rgb{1, 0, 0});
  CHECK(img.at(1, 0).g == doctest::Approx(128.0 / 255.0));

  auto p3 = load_image(bytes_of("P3 1 2 10\n10 0 5\n0 0 0\n"));
  CHECK(p3.at(0, 0).b == doctest::Approx(0.5));
  CHECK(p3.at(0, 1) == Rgb{0, 0, 0});

  auto wide = bytes_of(std::string("P6 1 1 65535\n") + std::string("\xff\xff\x80\x00\x00\x00", 6));
  auto w = load_image(wide);
  CHECK(w.at(0, 0).r == 1.0);
  CHECK(w.at(0, 0).g == doctest::Approx(32768.0 / 65535.0));
}

TEST_CASE("png decode") {
  auto img = load_image(kPngRgb);
  REQUIRE(img.width == 3);
  REQUIRE(img.height == 2);
  CHECK(img.at(0, 0) == Rgb{1, 0, 0});
  CHECK(img.at(1, 0) == Rgb{0, 1, 0});
  CHECK(img.at(2, 0) == Rgb{0, 0, 1});
  CHECK(img.at(0, 1) == Rgb{0, 0, 0});
  CHECK(img.at(1, 1) == Rgb{1, 1, 1});
  CHECK(img.at(2, 1).r == doctest::Approx(128.0 / 255.0));

  auto grey = load_image(kPngGrey);
  CHECK(grey.at(1, 0).r == doctest::Approx(200.0 / 255.0));
  CHECK(grey.at(1, 0).g == grey.at(1, 0).b);
}

TEST_CASE("malformed input is rejected") {
  CHECK(decode_error({}) == ErrorCode::DecodeError);
  CHECK(decode_error(bytes_of("GIF89a....")) == ErrorCode::UnsupportedFormat);
  CHECK(decode_error(bytes_of("P6 2 2 255\n\x01\x02")) == ErrorCode::DecodeError);
  CHECK(decode_error(bytes_of("P6 0 2 255\n")) == ErrorCode::DecodeError);
  CHECK(decode_error(bytes_of("P3 1 1 10\n11 0 0\n")) == ErrorCode::DecodeError);
  auto png = kPngRgb;
  png.resize(40);
  CHECK(decode_error(png) == ErrorCode::DecodeError);
  png = kPngRgb;
  png[45] ^= 0xFF;  // inside the compressed data
  CHECK(decode_error(png) == ErrorCode::DecodeError);
}

TEST_CASE("ppm round trip") {
  Rng rng(4);
  RgbImage img(7, 5);
  for (auto& p : img.data) p = {rng.uniform(), rng.uniform(), rng.uniform()};
  auto back = load_image(encode_ppm(img));
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.data[i].r - img.data[i].r) <= 0.5 / 255.0 + 1e-12);
    CHECK(std::abs(back.data[i].b - img.data[i].b) <= 0.5 / 255.0 + 1e-12);
  }
}

TEST_CASE("pgm masks round trip") {
  BoolPlane m(3, 2);
  m.data = {1, 0, 1, 0, 0, 1};
  CHECK(decode_pgm_mask(encode_pgm(m)) == m);
  Plane<std::uint32_t> labels(2, 1);
  labels.data = {0, 300};
  auto b = decode_pgm_mask(encode_pgm16(labels));
  CHECK(b.data == std::vector<std::uint8_t>{0, 1});
  CHECK_THROWS_AS(decode_pgm_mask(bytes_of("P6 1 1 255\n\x00")), Error);
}

TEST_CASE("normalize is the identity at the target size") {
  Rng rng(6);
  RgbImage img(kNormalizedSize, kNormalizedSize);
  for (auto& p : img.data) p = {rng.uniform(), rng.uniform(), rng.uniform()};
  CHECK(normalize_size(img) == img);
}

TEST_CASE("resize keeps constants and value bounds") {
  RgbImage flat(13, 7, Rgb{0.25, 0.5, 0.75});
  auto big = normalize_size(flat);
  CHECK(big.width == kNormalizedSize);
  CHECK(big.height == kNormalizedSize);
  for (const auto& p : big.data) {
    CHECK(p.r == doctest::Approx(0.25));
    CHECK(p.b == doctest::Approx(0.75));
  }
  RgbImage two(2, 1);
  two.data = {{0, 0, 0}, {1, 1, 1}};
  auto wide = resize_bilinear(two, 9, 3);
  for (int x = 0; x + 1 < wide.width; ++x) {
    CHECK(wide.at(x, 1).r <= wide.at(x + 1, 1).r);
    CHECK(wide.at(x, 1).r >= 0.0);
    CHECK(wide.at(x, 1).r <= 1.0);
  }
  CHECK_THROWS_AS(resize_bilinear(RgbImage{}, 5, 5), Error);
  CHECK_THROWS_AS(resize_bilinear(two, 0, 5), Error);
}

TEST_CASE("enhance applies gain about mid-grey then shift") {
  RgbImage img(3, 1);
  img.data = {{0.5, 0.0, 1.0}, {0.25, 0.75, 0.5}, {0.9, 0.1, 0.45}};
  auto out = enhance(img, {0.05, 1.2});
  CHECK(out.at(0, 0).r == doctest::Approx(0.55));
  CHECK(out.at(0, 0).g == 0.0);
  CHECK(out.at(0, 0).b == 1.0);
  CHECK(out.at(1, 0).r == doctest::Approx(0.5 + 1.2 * -0.25 + 0.05));
  auto same = enhance(img, {0.0, 1.0});
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(same.data[i].g == doctest::Approx(img.data[i].g));
  CHECK_THROWS_AS(enhance(img, {0.0, 0.0}), Error);
  CHECK_THROWS_AS(enhance(img, {0.0, -1.0}), Error);
}

TEST_CASE("missing file is an io error naming the path") {
  try {
    load_image_file("/no/such/leaf.png");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find("/no/such/leaf.png") != std::string::npos);
  }
}

TEST_CASE("worked decode, resize and enhance values") {
  auto red = load_image(bytes_of(std::string("P6 2 2 255\n") + std::string("\xff\x00\x00\xff\x00\x00\xff\x00\x00\xff\x00\x00", 12)));
  REQUIRE(red.width == 2);
  for (const auto& p : red.data) CHECK(p == Rgb{1, 0, 0});
  auto grey = load_image(bytes_of(std::string("P6 1 1 255\n\x80\x80\x80", 14)));
  CHECK(grey.at(0, 0) == Rgb{128.0 / 255, 128.0 / 255, 128.0 / 255});

  for (auto [w, h] : {std::pair{400, 400}, std::pair{100, 300}}) {
    auto out = normalize_size(RgbImage(w, h, Rgb{0.2, 0.3, 0.4}));
    CHECK(out.width == 200);
    CHECK(out.height == 200);
  }

  RgbImage mid(1, 1, Rgb{0.5, 0.9, 0.5});
  CHECK(enhance(mid, {0.1, 1.0}).at(0, 0).r == doctest::Approx(0.6));
  CHECK(enhance(mid, {0.0, 2.0}).at(0, 0).g == 1.0);
  auto a = rgb_to_hsi(Rgb{0.5, 0.5, 0.5});
  CHECK(a.intensity == 0.5);
  CHECK(a.saturation == 0.0);
  CHECK_FALSE(a.hue_defined);
}
