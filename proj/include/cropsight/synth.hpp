#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cropsight/classifier.hpp"
#include "cropsight/imaging.hpp"
#include "cropsight/segmentation.hpp"

namespace cropsight::synth {

using classifier::DiseaseClass;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v, double slack = 0.0) const noexcept { return v >= lo - slack && v <= hi + slack; }
};

struct SpotArchetype {
  DiseaseClass disease = DiseaseClass::LeafBlast;
  Range area;          // pixels
  Range eccentricity;  // minor / major
  Range hue;           // degrees
  Range saturation;
  Range intensity;
};

const SpotArchetype& archetype(DiseaseClass c) noexcept;

struct GroundTruthSpot {
  std::vector<Point> pixels;
  DiseaseClass disease = DiseaseClass::LeafBlast;
};

struct GroundTruth {
  imaging::RgbImage image;
  segmentation::BinaryMask spot_mask;
  std::vector<GroundTruthSpot> spots;
  DiseaseClass image_class = DiseaseClass::LeafBlast;
};

inline constexpr int kImageSize = 200;
inline constexpr int kMaxPlacementAttempts = 1000;
inline constexpr double kNoiseSigma = 0.01;

// 200x200 leaf with `spot_count` non-overlapping elliptical spots drawn from
// the class archetype. Throws PlacementFailure when a spot cannot be placed
// in kMaxPlacementAttempts tries.
GroundTruth generate_leaf(DiseaseClass disease, int spot_count, std::uint64_t seed);

// Spot-free leaf with the same background model.
imaging::RgbImage generate_blank_leaf(std::uint64_t seed);

struct ManifestEntry {
  std::string path;  // relative to the corpus root
  std::string split;  // "train" or "test"
  DiseaseClass disease = DiseaseClass::LeafBlast;
  std::uint64_t seed = 0;
};

struct CorpusManifest {
  std::string root;
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split(const std::string& name) const;
};

inline constexpr int kMinSpotsPerImage = 8;
inline constexpr int kMaxSpotsPerImage = 25;

// Writes {train,test}/{leafblast,brownspot}/img_NNN.ppm, matching
// img_NNN.truth.pgm masks and manifest.csv under `out_dir`.
CorpusManifest generate_corpus(int train_per_class, int test_per_class, std::uint64_t seed,
                               const std::string& out_dir);

CorpusManifest read_manifest(const std::string& corpus_dir);
std::string truth_path_for(const std::string& image_path);

}  // namespace cropsight::synth
