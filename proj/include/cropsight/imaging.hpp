#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cropsight/plane.hpp"

namespace cropsight::imaging {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Channels are reals in [0,1].
using RgbImage = Plane<Rgb>;

struct HsiPlanes {
  int width = 0;
  int height = 0;
  RealPlane hue;         // degrees, [0,360)
  RealPlane saturation;  // [0,1]
  RealPlane intensity;   // [0,1]
  BoolPlane hue_defined;  // 0 where the pixel is achromatic
};

struct EnhanceParams {
  double brightness_delta = 0.05;
  double contrast_gain = 1.2;
};

inline constexpr int kNormalizedSize = 200;

// Decodes PNG, binary PPM (P6) or plain PPM (P3).
// Throws DecodeError on malformed data and UnsupportedFormat on anything else.
RgbImage load_image(std::span<const std::uint8_t> bytes);
RgbImage load_image_file(const std::string& path);

// Bilinear resample to kNormalizedSize x kNormalizedSize. Pixel centres are
// aligned, so a 200x200 input is returned unchanged.
RgbImage normalize_size(const RgbImage& img);
RgbImage resize_bilinear(const RgbImage& img, int width, int height);

// c -> clamp(0.5 + gain * (c - 0.5) + delta, 0, 1) on every channel.
RgbImage enhance(const RgbImage& img, const EnhanceParams& params);

// Standard HSI model. Intensity is (R+G+B)/3; saturation is
// 1 - 3 min(R,G,B)/(R+G+B); hue comes from the arccos form and is mirrored
// to 360 - H when B > G. Achromatic pixels (R=G=B, including black) get
// S=0, H=0 and hue_defined=false.
HsiPlanes rgb_to_hsi(const RgbImage& img);

struct HsiPixel {
  double hue = 0.0;
  double saturation = 0.0;
  double intensity = 0.0;
  bool hue_defined = false;
};
HsiPixel rgb_to_hsi(const Rgb& px) noexcept;

// Netpbm writers used for corpora and debug dumps. Channels are quantised to
// 8 bits with round-to-nearest.
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
std::vector<std::uint8_t> encode_pgm(const BoolPlane& mask);
// Label planes are written with 16-bit samples.
std::vector<std::uint8_t> encode_pgm16(const Plane<std::uint32_t>& labels);
BoolPlane decode_pgm_mask(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace cropsight::imaging
