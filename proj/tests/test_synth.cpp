#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cropsight/error.hpp"
#include "cropsight/features.hpp"
#include "cropsight/synth.hpp"
#include "oracles/oracles.hpp"

using namespace cropsight;
using namespace cropsight::synth;
namespace fs = std::filesystem;

namespace {

struct Extremes {
  double bg_max_sat = 0.0;
  double spot_min_sat = 1.0;
  double bg_min_hue = 360.0;
};

Extremes extremes(const imaging::RgbImage& img, const BoolPlane& mask) {
  Extremes e;
  for (std::size_t i = 0; i < img.size(); ++i) {
    auto h = imaging::rgb_to_hsi(img.data[i]);
    if (mask.data[i]) {
      e.spot_min_sat = std::min(e.spot_min_sat, h.saturation);
    } else {
      e.bg_max_sat = std::max(e.bg_max_sat, h.saturation);
      e.bg_min_hue = std::min(e.bg_min_hue, h.hue);
    }
  }
  return e;
}

std::string scratch(const std::string& name) {
  auto dir = fs::path(CS_BINARY_DIR) / "scratch" / name;
  fs::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("leaves are deterministic for a seed") {
  auto a = generate_leaf(DiseaseClass::BrownSpot, 10, 99);
  auto b = generate_leaf(DiseaseClass::BrownSpot, 10, 99);
  CHECK(a.image == b.image);
  CHECK(a.spot_mask == b.spot_mask);
  auto c = generate_leaf(DiseaseClass::BrownSpot, 10, 100);
  CHECK_FALSE(a.image == c.image);
  CHECK(generate_blank_leaf(5) == generate_blank_leaf(5));
}

TEST_CASE("spots are separate components matching their archetype") {
  for (auto disease : {DiseaseClass::LeafBlast, DiseaseClass::BrownSpot}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const int count = kMinSpotsPerImage + static_cast<int>(seed) * 2;
      auto gt = generate_leaf(disease, count, seed);
      REQUIRE(gt.image.width == kImageSize);
      REQUIRE(gt.spots.size() == static_cast<std::size_t>(count));
      CHECK(gt.image_class == disease);
      CHECK(oracle::flood_fill(gt.spot_mask, 8).count == count);

      std::size_t on = 0;
      for (auto v : gt.spot_mask.data) on += v;
      std::size_t listed = 0;
      const auto& arch = archetype(disease);
      for (const auto& s : gt.spots) {
        listed += s.pixels.size();
        CHECK(s.disease == disease);
        for (auto p : s.pixels) CHECK(gt.spot_mask.at(p.x, p.y) == 1);
        auto f = features::extract_features(segmentation::make_spot(s.pixels));
        CHECK(f.area >= 0.8 * arch.area.lo);
        CHECK(f.area <= 1.2 * arch.area.hi);
        CHECK(arch.eccentricity.contains(f.eccentricity, 0.1));
        CHECK(f.euler_number == 1);
      }
      CHECK(listed == on);
    }
  }
}

TEST_CASE("every spot pixel is more saturated than every leaf pixel") {
  for (auto disease : {DiseaseClass::LeafBlast, DiseaseClass::BrownSpot}) {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
      auto gt = generate_leaf(disease, 15, seed);
      auto e = extremes(gt.image, gt.spot_mask);
      CAPTURE(seed);
      CHECK(e.bg_max_sat < e.spot_min_sat - 0.1);
      CHECK(e.bg_min_hue > 90.0);
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto blank = generate_blank_leaf(seed);
    auto e = extremes(blank, BoolPlane(blank.width, blank.height, 0));
    CHECK(e.bg_min_hue > 90.0);
    CHECK(e.bg_max_sat < 0.4);
  }
}

TEST_CASE("overfull leaves fail to place") {
  try {
    generate_leaf(DiseaseClass::BrownSpot, 500, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PlacementFailure);
  }
  CHECK_THROWS_AS(generate_leaf(DiseaseClass::LeafBlast, 0, 1), Error);
}

TEST_CASE("corpus layout and manifest") {
  const auto dir = scratch("synth_corpus");
  auto m = generate_corpus(3, 2, 42, dir);
  CHECK(m.entries.size() == 10);
  CHECK(m.split("train").size() == 6);
  CHECK(m.split("test").size() == 4);
  std::set<std::uint64_t> seeds;
  for (const auto& e : m.entries) {
    CHECK(fs::exists(fs::path(dir) / e.path));
    CHECK(fs::exists(fs::path(dir) / truth_path_for(e.path)));
    CHECK(e.path.rfind(e.split + "/" + std::string(classifier::class_slug(e.disease)) + "/img_", 0) == 0);
    seeds.insert(e.seed);
  }
  CHECK(seeds.size() == 10);
  CHECK(fs::exists(fs::path(dir) / "test/brownspot/img_001.ppm"));

  auto back = read_manifest(dir);
  REQUIRE(back.entries.size() == m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(back.entries[i].path == m.entries[i].path);
    CHECK(back.entries[i].seed == m.entries[i].seed);
    CHECK(back.entries[i].disease == m.entries[i].disease);
  }

  // Each stored image is the generator output for its seed.
  const auto& e = m.entries[4];
  auto img = imaging::load_image_file((fs::path(dir) / e.path).string());
  auto truth = imaging::decode_pgm_mask(imaging::read_file((fs::path(dir) / truth_path_for(e.path)).string()));
  int spots = oracle::flood_fill(truth, 8).count;
  CHECK(spots >= kMinSpotsPerImage);
  CHECK(spots <= kMaxSpotsPerImage);
  auto regen = generate_leaf(e.disease, spots, e.seed);
  CHECK(regen.spot_mask == truth);
  CHECK(img.same_shape(regen.image));
}

TEST_CASE("default corpus has ninety images") {
  const auto dir = scratch("synth_default");
  auto m = generate_corpus(25, 20, 42, dir);
  CHECK(m.entries.size() == 90);
  std::size_t ppm = 0, pgm = 0;
  for (const auto& f : fs::recursive_directory_iterator(dir)) {
    const auto name = f.path().filename().string();
    if (name.ends_with(".truth.pgm")) ++pgm;
    else if (name.ends_with(".ppm")) ++ppm;
  }
  CHECK(ppm == 90);
  CHECK(pgm == 90);
}

TEST_CASE("corpus generation is byte-for-byte repeatable") {
  const auto a = scratch("synth_rep_a");
  const auto b = scratch("synth_rep_b");
  generate_corpus(2, 1, 7, a);
  generate_corpus(2, 1, 7, b);
  for (const auto& f : fs::recursive_directory_iterator(a)) {
    if (!f.is_regular_file()) continue;
    auto rel = fs::relative(f.path(), a);
    CHECK(imaging::read_file(f.path().string()) == imaging::read_file((fs::path(b) / rel).string()));
  }
}

TEST_CASE("manifest errors") {
  const auto dir = scratch("synth_bad_manifest");
  CHECK_THROWS_AS(read_manifest(dir), Error);
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / "manifest.csv") << "path,split,class,seed\ntrain/x.ppm,train,rust,1\n";
  CHECK_THROWS_AS(read_manifest(dir), Error);
  std::ofstream(fs::path(dir) / "manifest.csv") << "wrong header\n";
  CHECK_THROWS_AS(read_manifest(dir), Error);
  CHECK_THROWS_AS(generate_corpus(0, 1, 1, dir), Error);
}

TEST_CASE("single-spot leaves and the smallest corpus") {
  for (auto disease : {DiseaseClass::LeafBlast, DiseaseClass::BrownSpot}) {
    const auto& arch = archetype(disease);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto gt = generate_leaf(disease, 1, seed);
      std::size_t on = 0;
      for (auto v : gt.spot_mask.data) on += v;
      CHECK(on >= 0.8 * arch.area.lo);
      CHECK(on <= 1.2 * arch.area.hi);
    }
  }
  CHECK(generate_corpus(1, 1, 3, scratch("synth_tiny")).entries.size() == 4);
}
