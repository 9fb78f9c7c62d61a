#include "cropsight/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cropsight/error.hpp"
#include "cropsight/features.hpp"
#include "cropsight/rng.hpp"

namespace cropsight::synth {

namespace {

namespace fs = std::filesystem;
using imaging::Rgb;

constexpr int kGap = 3;         // minimum Chebyshev distance between spots
constexpr int kBorder = 3;      // keep spots off the image edge
constexpr int kShapeTries = 400;
constexpr double kEccSlack = 0.1;

// Leaf background: pale green with r == b, so hue 120 degrees and saturation
// about 0.09. The green margin of 0.14 exceeds the largest change the clamped
// noise can make to 2r - g - b (4 * 3 sigma = 0.12), so no background pixel
// can reach a hue below 90 degrees.
constexpr Rgb kLeaf{0.48, 0.62, 0.48};
constexpr double kTint = 0.03;   // grey offset per leaf
constexpr double kGreen = 0.02;  // extra green per leaf; only widens the margin
constexpr double kShade = 0.02;

const SpotArchetype kLeafBlast{DiseaseClass::LeafBlast, {4, 30}, {0.2, 0.6}, {35, 50}, {0.5, 0.65}, {0.36, 0.44}};
const SpotArchetype kBrownSpot{DiseaseClass::BrownSpot, {10, 80}, {0.5, 0.95}, {18, 30}, {0.6, 0.8}, {0.28, 0.36}};

// Only defined for hue in [0, 120), which covers both archetypes.
Rgb spot_colour(double hue_deg, double s, double i) {
  const double h = hue_deg * std::numbers::pi / 180.0;
  const double b = i * (1.0 - s);
  const double r = i * (1.0 + s * std::cos(h) / std::cos(std::numbers::pi / 3.0 - h));
  const double g = 3.0 * i - (r + b);
  return {r, g, b};
}

double bounded_noise(Rng& rng) {
  return std::clamp(rng.normal() * kNoiseSigma, -3.0 * kNoiseSigma, 3.0 * kNoiseSigma);
}

struct Shape {
  std::vector<Point> offsets;  // relative to the placement anchor
  int min_dx, min_dy, max_dx, max_dy;
};

std::optional<Shape> sample_shape(const SpotArchetype& arch, Rng& rng) {
  const double area = rng.uniform(arch.area.lo, arch.area.hi);
  const double ecc = rng.uniform(arch.eccentricity.lo, arch.eccentricity.hi);
  const double a = std::sqrt(area / (std::numbers::pi * ecc));
  const double b = ecc * a;
  const double theta = rng.uniform(0.0, std::numbers::pi);
  const double fx = rng.uniform(-0.5, 0.5);
  const double fy = rng.uniform(-0.5, 0.5);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const int reach = static_cast<int>(std::ceil(a)) + 1;

  std::vector<Point> pts;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const double px = dx - fx;
      const double py = dy - fy;
      const double u = (px * c + py * s) / a;
      const double v = (-px * s + py * c) / b;
      if (u * u + v * v <= 1.0) pts.push_back({dx, dy});
    }
  }
  const auto n = static_cast<double>(pts.size());
  if (pts.size() < 3 || n < 0.8 * arch.area.lo || n > 1.2 * arch.area.hi) return std::nullopt;

  auto spot = segmentation::make_spot(pts);
  // Must be one 8-connected piece whose measured shape matches the archetype.
  segmentation::BinaryMask local(spot.aabb.width(), spot.aabb.height(), 0);
  for (auto p : spot.pixels) local.at(p.x - spot.aabb.min_x, p.y - spot.aabb.min_y) = 1;
  if (segmentation::label_components(local).region_count != 1) return std::nullopt;
  if (features::euler_number(spot) != 1) return std::nullopt;
  const double measured = features::extract_features(spot).eccentricity;
  if (!arch.eccentricity.contains(measured, kEccSlack)) return std::nullopt;

  return Shape{std::move(spot.pixels), spot.aabb.min_x, spot.aabb.min_y, spot.aabb.max_x, spot.aabb.max_y};
}

imaging::RgbImage leaf_background(Rng& rng) {
  const double grey = rng.uniform(-kTint, kTint);
  const Rgb base{kLeaf.r + grey, kLeaf.g + grey + rng.uniform(0.0, kGreen), kLeaf.b + grey};
  const double phase_x = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double phase_y = rng.uniform(0.0, 2.0 * std::numbers::pi);
  imaging::RgbImage img(kImageSize, kImageSize);
  for (int y = 0; y < kImageSize; ++y) {
    for (int x = 0; x < kImageSize; ++x) {
      // Gentle shading across the blade.
      const double shade = kShade * 0.5 * (std::sin(x * 0.031 + phase_x) + std::sin(y * 0.023 + phase_y));
      img.at(x, y) = {base.r + shade, base.g + shade, base.b + shade};
    }
  }
  return img;
}

void add_noise(imaging::RgbImage& img, Rng& rng) {
  for (auto& px : img.data) {
    px.r = std::clamp(px.r + bounded_noise(rng), 0.0, 1.0);
    px.g = std::clamp(px.g + bounded_noise(rng), 0.0, 1.0);
    px.b = std::clamp(px.b + bounded_noise(rng), 0.0, 1.0);
  }
}

std::uint64_t image_seed(std::uint64_t corpus_seed, std::uint64_t index) {
  return splitmix64(corpus_seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

int spot_count_for(std::uint64_t seed) {
  return kMinSpotsPerImage +
         static_cast<int>(splitmix64(seed ^ 0xA5A5A5A5A5A5A5A5ull) % (kMaxSpotsPerImage - kMinSpotsPerImage + 1));
}

std::string image_name(int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%03d.ppm", n);
  return buf;
}

}  // namespace

const SpotArchetype& archetype(DiseaseClass c) noexcept {
  return c == DiseaseClass::LeafBlast ? kLeafBlast : kBrownSpot;
}

imaging::RgbImage generate_blank_leaf(std::uint64_t seed) {
  Rng rng(seed);
  auto img = leaf_background(rng);
  add_noise(img, rng);
  return img;
}

GroundTruth generate_leaf(DiseaseClass disease, int spot_count, std::uint64_t seed) {
  if (spot_count < 1) throw Error(ErrorCode::InvalidParams, "spot_count must be at least 1");
  const SpotArchetype& arch = archetype(disease);
  Rng rng(seed);

  GroundTruth gt;
  gt.image_class = disease;
  gt.image = leaf_background(rng);
  gt.spot_mask = segmentation::BinaryMask(kImageSize, kImageSize, 0);
  BoolPlane blocked(kImageSize, kImageSize, 0);

  for (int n = 0; n < spot_count; ++n) {
    std::optional<Shape> shape;
    for (int t = 0; t < kShapeTries && !shape; ++t) shape = sample_shape(arch, rng);
    if (!shape) throw Error(ErrorCode::Internal, "could not sample a spot shape for the archetype");

    const int lo_x = kBorder - shape->min_dx;
    const int hi_x = kImageSize - 1 - kBorder - shape->max_dx;
    const int lo_y = kBorder - shape->min_dy;
    const int hi_y = kImageSize - 1 - kBorder - shape->max_dy;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const int ax = rng.range(lo_x, hi_x);
      const int ay = rng.range(lo_y, hi_y);
      placed = std::none_of(shape->offsets.begin(), shape->offsets.end(),
                            [&](Point o) { return blocked.at(ax + o.x, ay + o.y) != 0; });
      if (!placed) continue;

      const Rgb colour = spot_colour(rng.uniform(arch.hue.lo, arch.hue.hi), rng.uniform(arch.saturation.lo, arch.saturation.hi),
                                     rng.uniform(arch.intensity.lo, arch.intensity.hi));
      GroundTruthSpot spot{{}, disease};
      for (auto o : shape->offsets) {
        const Point p{ax + o.x, ay + o.y};
        spot.pixels.push_back(p);
        gt.spot_mask.at(p.x, p.y) = 1;
        gt.image.at(p.x, p.y) = colour;
        for (int by = std::max(0, p.y - kGap); by <= std::min(kImageSize - 1, p.y + kGap); ++by) {
          for (int bx = std::max(0, p.x - kGap); bx <= std::min(kImageSize - 1, p.x + kGap); ++bx) blocked.at(bx, by) = 1;
        }
      }
      gt.spots.push_back(std::move(spot));
    }
    if (!placed) {
      throw Error(ErrorCode::PlacementFailure, "could not place spot " + std::to_string(n + 1) + " of " +
                                                   std::to_string(spot_count) + " without overlap");
    }
  }
  add_noise(gt.image, rng);
  return gt;
}

std::vector<ManifestEntry> CorpusManifest::split(const std::string& name) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out), [&](const auto& e) { return e.split == name; });
  return out;
}

std::string truth_path_for(const std::string& image_path) {
  auto dot = image_path.rfind(".ppm");
  return (dot == std::string::npos ? image_path : image_path.substr(0, dot)) + ".truth.pgm";
}

CorpusManifest generate_corpus(int train_per_class, int test_per_class, std::uint64_t seed, const std::string& out_dir) {
  if (train_per_class < 1 || test_per_class < 1) throw Error(ErrorCode::InvalidParams, "corpus counts must be at least 1");
  CorpusManifest manifest;
  manifest.root = out_dir;
  std::uint64_t index = 0;
  std::error_code ec;
  for (const auto& [split, count] : {std::pair<std::string, int>{"train", train_per_class}, {"test", test_per_class}}) {
    for (auto disease : {DiseaseClass::LeafBlast, DiseaseClass::BrownSpot}) {
      const std::string dir = split + "/" + std::string(classifier::class_slug(disease));
      fs::create_directories(fs::path(out_dir) / dir, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + (fs::path(out_dir) / dir).string() + ": " + ec.message());
      for (int n = 0; n < count; ++n) {
        const std::uint64_t s = image_seed(seed, index++);
        GroundTruth gt = generate_leaf(disease, spot_count_for(s), s);
        const std::string rel = dir + "/" + image_name(n);
        imaging::write_file((fs::path(out_dir) / rel).string(), imaging::encode_ppm(gt.image));
        imaging::write_file((fs::path(out_dir) / truth_path_for(rel)).string(), imaging::encode_pgm(gt.spot_mask));
        manifest.entries.push_back({rel, split, disease, s});
      }
    }
  }

  std::ostringstream csv;
  csv << "path,split,class,seed\n";
  for (const auto& e : manifest.entries) {
    csv << e.path << ',' << e.split << ',' << classifier::class_slug(e.disease) << ',' << e.seed << '\n';
  }
  const std::string text = csv.str();
  imaging::write_file((fs::path(out_dir) / "manifest.csv").string(),
                      {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return manifest;
}

CorpusManifest read_manifest(const std::string& corpus_dir) {
  const auto path = (fs::path(corpus_dir) / "manifest.csv").string();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus manifest: " + path);
  CorpusManifest m;
  m.root = corpus_dir;
  std::string line;
  std::getline(in, line);
  if (line.rfind("path,split,class,seed", 0) != 0) throw Error(ErrorCode::IoError, "unexpected manifest header in " + path);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 4 || (cols[1] != "train" && cols[1] != "test")) {
      throw Error(ErrorCode::IoError, path + ":" + std::to_string(line_no) + ": malformed manifest row");
    }
    try {
      m.entries.push_back({cols[0], cols[1], classifier::parse_class(cols[2]), std::stoull(cols[3])});
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::IoError, path + ":" + std::to_string(line_no) + ": bad seed");
    } catch (const Error&) {
      throw Error(ErrorCode::IoError, path + ":" + std::to_string(line_no) + ": bad class");
    }
  }
  return m;
}

}  // namespace cropsight::synth
