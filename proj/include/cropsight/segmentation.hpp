#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cropsight/plane.hpp"

namespace cropsight::segmentation {

using BinaryMask = BoolPlane;

struct Histogram {
  int levels = 0;
  std::vector<std::uint64_t> counts;
  double lo = 0.0;
  double hi = 1.0;

  double bin_width() const noexcept { return (hi - lo) / levels; }
  // Upper edge of bin k, i.e. the boundary between bins k and k+1.
  double upper_edge(int k) const noexcept { return lo + (k + 1) * bin_width(); }
  std::uint64_t total() const noexcept;
  int bin_of(double value) const noexcept;
};

enum class ThresholdMode { Fixed, Otsu };
enum class Polarity { Above, Below };

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::Otsu;
  double value = 0.0;
  Polarity polarity = Polarity::Above;
  int levels = 256;
  // Histogram domain; also the domain a fixed value must lie in.
  double lo = 0.0;
  double hi = 1.0;
};

struct MaskedPlane {
  RealPlane values;
  BoolPlane valid;

  int width() const noexcept { return values.width; }
  int height() const noexcept { return values.height; }
  std::size_t valid_count() const noexcept;
};

struct Aabb {
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;
  int max_y = 0;

  int width() const noexcept { return max_x - min_x + 1; }
  int height() const noexcept { return max_y - min_y + 1; }
  friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct Spot {
  std::uint32_t label = 0;
  std::vector<Point> pixels;  // row-major order
  Aabb aabb;

  std::size_t area() const noexcept { return pixels.size(); }
};

// Builds a spot from an arbitrary non-empty pixel list (sorted and
// de-duplicated, aabb computed). Used by tests and the generator.
Spot make_spot(std::vector<Point> pixels, std::uint32_t label = 1);

struct LabeledRegions {
  Plane<std::uint32_t> labels;  // 0 = background
  std::uint32_t region_count = 0;
  std::vector<Spot> regions;  // regions[i].label == i + 1
};

enum class Connectivity { Four = 4, Eight = 8 };

struct OtsuResult {
  double threshold = 0.0;
  int cut_bin = 0;  // foreground/background boundary sits after this bin
  bool degenerate = false;
};

struct ThresholdOutcome {
  BinaryMask mask;
  std::optional<double> threshold;  // empty when no pixel was eligible
  bool degenerate = false;
};

// Each valid pixel lands in exactly one of `levels` uniform bins over
// [lo, hi]; out-of-range values are clamped to the end bins.
Histogram histogram(const RealPlane& plane, const BoolPlane* valid, int levels, double lo, double hi);
Histogram histogram(const MaskedPlane& mp, int levels, double lo, double hi);

// Between-class-variance maximiser over all bin boundaries. Ties go to the
// lowest boundary. If all mass sits in one bin the result is flagged
// degenerate and carries that bin's upper edge. An empty histogram throws
// DegenerateHistogram.
OtsuResult otsu_threshold(const Histogram& h);

ThresholdOutcome binary_saturation_mask(const RealPlane& saturation, const ThresholdSpec& spec);

MaskedPlane mask_hue(const RealPlane& hue, const BinaryMask& mask);

// Foreground is always a subset of mp.valid. In Otsu mode the histogram is
// taken over valid pixels only; pass `precomputed` to reuse one.
ThresholdOutcome threshold_segment(const MaskedPlane& mp, const ThresholdSpec& spec,
                                   const Histogram* precomputed = nullptr);

LabeledRegions label_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::Eight);

LabeledRegions min_spot_filter(const LabeledRegions& lr, std::size_t min_area);

}  // namespace cropsight::segmentation
