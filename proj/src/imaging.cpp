#include "cropsight/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string_view>

#include "cropsight/error.hpp"

namespace cropsight::imaging {

namespace {

constexpr std::size_t kMaxPixels = 64u * 1024u * 1024u;

[[noreturn]] void decode_fail(const std::string& what) {
  throw Error(ErrorCode::DecodeError, "image decode failed: " + what);
}

class NetpbmReader {
 public:
  explicit NetpbmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Header tokens may be separated by whitespace and '#' comments.
  unsigned long header_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !is_digit(bytes_[pos_])) decode_fail("malformed netpbm header");
    unsigned long v = 0;
    while (pos_ < bytes_.size() && is_digit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul) decode_fail("netpbm header value out of range");
      ++pos_;
    }
    return v;
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) decode_fail("missing raster separator");
    ++pos_;
  }

  std::uint32_t raw_sample(bool wide) {
    if (wide) {
      if (pos_ + 2 > bytes_.size()) decode_fail("truncated raster");
      std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 8) | bytes_[pos_ + 1];
      pos_ += 2;
      return v;
    }
    if (pos_ >= bytes_.size()) decode_fail("truncated raster");
    return bytes_[pos_++];
  }

  void skip(std::size_t n) { pos_ += n; }

 private:
  static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }
  static bool is_digit(std::uint8_t c) { return c >= '0' && c <= '9'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct NetpbmHeader {
  int width;
  int height;
  std::uint32_t maxval;
};

NetpbmHeader read_header(NetpbmReader& rd, std::uint32_t max_allowed) {
  auto w = rd.header_number();
  auto h = rd.header_number();
  auto maxval = rd.header_number();
  if (w == 0 || h == 0) decode_fail("zero image dimension");
  if (w * h > kMaxPixels) decode_fail("image too large");
  if (maxval == 0 || maxval > max_allowed) decode_fail("invalid maxval");
  return {static_cast<int>(w), static_cast<int>(h), static_cast<std::uint32_t>(maxval)};
}

RgbImage decode_ppm(std::span<const std::uint8_t> bytes, bool binary) {
  NetpbmReader rd(bytes);
  rd.skip(2);
  auto hdr = read_header(rd, 65535);
  RgbImage img(hdr.width, hdr.height);
  const double scale = 1.0 / static_cast<double>(hdr.maxval);
  const bool wide = hdr.maxval > 255;
  if (binary) rd.single_whitespace();
  auto sample = [&]() -> double {
    std::uint32_t v = binary ? rd.raw_sample(wide) : static_cast<std::uint32_t>(rd.header_number());
    if (v > hdr.maxval) decode_fail("sample exceeds maxval");
    return static_cast<double>(v) * scale;
  };
  for (auto& px : img.data) {
    px.r = sample();
    px.g = sample();
    px.b = sample();
  }
  return img;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    decode_fail(msg);
  }
  if (image.width == 0 || image.height == 0 ||
      static_cast<std::size_t>(image.width) * image.height > kMaxPixels) {
    png_image_free(&image);
    decode_fail("invalid PNG dimensions");
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    decode_fail(msg);
  }
  RgbImage img(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < img.size(); ++i) {
    img.data[i] = {buffer[3 * i] / 255.0, buffer[3 * i + 1] / 255.0, buffer[3 * i + 2] / 255.0};
  }
  return img;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::lround(clamp01(v) * 255.0)); }

std::vector<std::uint8_t> netpbm_header(std::string_view magic, int w, int h, int maxval) {
  std::string hdr = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
                    std::to_string(maxval) + "\n";
  return {hdr.begin(), hdr.end()};
}

}  // namespace

RgbImage load_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) decode_fail("empty input");
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSig), std::end(kPngSig), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, true);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '3') return decode_ppm(bytes, false);
  if (bytes.size() < 2) decode_fail("input too short to identify");
  throw Error(ErrorCode::UnsupportedFormat, "unsupported image format (expected PNG or PPM)");
}

RgbImage load_image_file(const std::string& path) {
  auto bytes = read_file(path);
  return load_image(bytes);
}

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
  if (img.empty() || img.width <= 0 || img.height <= 0) {
    throw Error(ErrorCode::EmptyImage, "cannot resize an empty image");
  }
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidParams, "target size must be positive");
  if (img.width == width && img.height == height) return img;

  RgbImage out(width, height);
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    int y0 = static_cast<int>(std::floor(fy));
    int y1 = std::min(y0 + 1, img.height - 1);
    double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      int x0 = static_cast<int>(std::floor(fx));
      int x1 = std::min(x0 + 1, img.width - 1);
      double tx = fx - x0;
      const Rgb& a = img.at(x0, y0);
      const Rgb& b = img.at(x1, y0);
      const Rgb& c = img.at(x0, y1);
      const Rgb& d = img.at(x1, y1);
      auto mix = [&](double pa, double pb, double pc, double pd) {
        double top = pa + (pb - pa) * tx;
        double bottom = pc + (pd - pc) * tx;
        return clamp01(top + (bottom - top) * ty);
      };
      out.at(x, y) = {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)};
    }
  }
  return out;
}

RgbImage normalize_size(const RgbImage& img) { return resize_bilinear(img, kNormalizedSize, kNormalizedSize); }

RgbImage enhance(const RgbImage& img, const EnhanceParams& params) {
  if (!(params.contrast_gain > 0.0) || !std::isfinite(params.contrast_gain) ||
      !std::isfinite(params.brightness_delta)) {
    throw Error(ErrorCode::InvalidParams, "contrast_gain must be a finite value > 0");
  }
  RgbImage out = img;
  auto f = [&](double c) { return clamp01(0.5 + params.contrast_gain * (c - 0.5) + params.brightness_delta); };
  for (auto& px : out.data) px = {f(px.r), f(px.g), f(px.b)};
  return out;
}

HsiPixel rgb_to_hsi(const Rgb& px) noexcept {
  HsiPixel out;
  const double sum = px.r + px.g + px.b;
  out.intensity = sum / 3.0;
  if (sum <= 0.0 || (px.r == px.g && px.g == px.b)) return out;

  const double mn = std::min({px.r, px.g, px.b});
  out.saturation = std::clamp(1.0 - 3.0 * mn / sum, 0.0, 1.0);

  const double num = 0.5 * ((px.r - px.g) + (px.r - px.b));
  const double den = std::sqrt((px.r - px.g) * (px.r - px.g) + (px.r - px.b) * (px.g - px.b));
  if (den <= 0.0) return out;
  double theta = std::acos(std::clamp(num / den, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  double h = px.b > px.g ? 360.0 - theta : theta;
  if (h >= 360.0) h -= 360.0;
  out.hue = h;
  out.hue_defined = true;
  return out;
}

HsiPlanes rgb_to_hsi(const RgbImage& img) {
  HsiPlanes planes{img.width, img.height, RealPlane(img.width, img.height), RealPlane(img.width, img.height),
                   RealPlane(img.width, img.height), BoolPlane(img.width, img.height)};
  for (std::size_t i = 0; i < img.size(); ++i) {
    auto p = rgb_to_hsi(img.data[i]);
    planes.hue.data[i] = p.hue;
    planes.saturation.data[i] = p.saturation;
    planes.intensity.data[i] = p.intensity;
    planes.hue_defined.data[i] = p.hue_defined ? 1 : 0;
  }
  return planes;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  auto out = netpbm_header("P6", img.width, img.height, 255);
  out.reserve(out.size() + img.size() * 3);
  for (const auto& px : img.data) {
    out.push_back(quantize(px.r));
    out.push_back(quantize(px.g));
    out.push_back(quantize(px.b));
  }
  return out;
}

std::vector<std::uint8_t> encode_pgm(const BoolPlane& mask) {
  auto out = netpbm_header("P5", mask.width, mask.height, 255);
  for (auto v : mask.data) out.push_back(v ? 255 : 0);
  return out;
}

std::vector<std::uint8_t> encode_pgm16(const Plane<std::uint32_t>& labels) {
  auto out = netpbm_header("P5", labels.width, labels.height, 65535);
  for (auto v : labels.data) {
    auto c = static_cast<std::uint16_t>(std::min<std::uint32_t>(v, 65535));
    out.push_back(static_cast<std::uint8_t>(c >> 8));
    out.push_back(static_cast<std::uint8_t>(c & 0xFF));
  }
  return out;
}

BoolPlane decode_pgm_mask(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') decode_fail("expected binary PGM (P5)");
  NetpbmReader rd(bytes);
  rd.skip(2);
  auto hdr = read_header(rd, 65535);
  rd.single_whitespace();
  BoolPlane mask(hdr.width, hdr.height);
  for (auto& v : mask.data) v = rd.raw_sample(hdr.maxval > 255) != 0 ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace cropsight::imaging
