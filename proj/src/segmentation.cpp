#include "cropsight/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cropsight/error.hpp"

namespace cropsight::segmentation {

namespace {

void check_levels(int levels) {
  if (levels < 2) throw Error(ErrorCode::InvalidBinCount, "histogram needs at least 2 levels");
}

bool passes(double value, double threshold, Polarity polarity) {
  // Below is the exact complement of Above.
  return polarity == Polarity::Above ? value > threshold : value <= threshold;
}

void check_fixed(const ThresholdSpec& spec) {
  if (spec.mode == ThresholdMode::Fixed && !(spec.value >= spec.lo && spec.value <= spec.hi)) {
    throw Error(ErrorCode::InvalidParams, "fixed threshold outside the plane domain");
  }
  if (!(spec.hi > spec.lo)) throw Error(ErrorCode::InvalidParams, "threshold domain must satisfy lo < hi");
}

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

std::uint64_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

int Histogram::bin_of(double value) const noexcept {
  double t = (value - lo) / (hi - lo) * levels;
  if (!(t >= 0.0)) return 0;
  if (t >= levels) return levels - 1;
  return static_cast<int>(t);
}

std::size_t MaskedPlane::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(valid.data.begin(), valid.data.end(), [](auto v) { return v != 0; }));
}

Spot make_spot(std::vector<Point> pixels, std::uint32_t label) {
  if (pixels.empty()) throw Error(ErrorCode::InvalidParams, "a spot needs at least one pixel");
  std::sort(pixels.begin(), pixels.end(), [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  Spot s;
  s.label = label;
  s.aabb = {pixels.front().x, pixels.front().y, pixels.front().x, pixels.front().y};
  for (auto p : pixels) {
    s.aabb.min_x = std::min(s.aabb.min_x, p.x);
    s.aabb.max_x = std::max(s.aabb.max_x, p.x);
    s.aabb.min_y = std::min(s.aabb.min_y, p.y);
    s.aabb.max_y = std::max(s.aabb.max_y, p.y);
  }
  s.pixels = std::move(pixels);
  return s;
}

Histogram histogram(const RealPlane& plane, const BoolPlane* valid, int levels, double lo, double hi) {
  check_levels(levels);
  if (!(hi > lo)) throw Error(ErrorCode::InvalidParams, "histogram domain must satisfy lo < hi");
  if (valid && !valid->same_shape(plane)) throw Error(ErrorCode::DimensionMismatch, "validity plane shape mismatch");
  Histogram h{levels, std::vector<std::uint64_t>(static_cast<std::size_t>(levels), 0), lo, hi};
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (valid && !valid->data[i]) continue;
    ++h.counts[static_cast<std::size_t>(h.bin_of(plane.data[i]))];
  }
  return h;
}

Histogram histogram(const MaskedPlane& mp, int levels, double lo, double hi) {
  return histogram(mp.values, &mp.valid, levels, lo, hi);
}

OtsuResult otsu_threshold(const Histogram& h) {
  check_levels(h.levels);
  const auto n = static_cast<std::size_t>(h.levels);
  __int128 total = 0;
  __int128 weighted_total = 0;
  int nonzero_bins = 0;
  int last_nonzero = 0;
  for (std::size_t k = 0; k < n; ++k) {
    total += h.counts[k];
    weighted_total += static_cast<__int128>(h.counts[k]) * static_cast<__int128>(k);
    if (h.counts[k]) {
      ++nonzero_bins;
      last_nonzero = static_cast<int>(k);
    }
  }
  if (total == 0) throw Error(ErrorCode::DegenerateHistogram, "histogram has no mass");
  if (nonzero_bins == 1) return {h.upper_edge(last_nonzero), last_nonzero, true};

  // sigma_B^2 is proportional to (N*s0 - n0*S)^2 / (n0*n1), with bin indices
  // standing in for bin values (argmax is invariant to the affine map).
  long double best = -1.0L;
  int best_cut = 0;
  __int128 n0 = 0;
  __int128 s0 = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    n0 += h.counts[k];
    s0 += static_cast<__int128>(h.counts[k]) * static_cast<__int128>(k);
    const __int128 n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const auto diff = static_cast<long double>(total * s0 - n0 * weighted_total);
    const long double var = diff * diff / (static_cast<long double>(n0) * static_cast<long double>(n1));
    if (var > best) {
      best = var;
      best_cut = static_cast<int>(k);
    }
  }
  return {h.upper_edge(best_cut), best_cut, false};
}

ThresholdOutcome binary_saturation_mask(const RealPlane& saturation, const ThresholdSpec& spec) {
  check_fixed(spec);
  ThresholdOutcome out{BinaryMask(saturation.width, saturation.height), std::nullopt, false};
  double t = spec.value;
  if (spec.mode == ThresholdMode::Otsu) {
    if (saturation.empty()) throw Error(ErrorCode::EmptyImage, "saturation plane is empty");
    auto r = otsu_threshold(histogram(saturation, nullptr, spec.levels, spec.lo, spec.hi));
    t = r.threshold;
    out.degenerate = r.degenerate;
  }
  out.threshold = t;
  for (std::size_t i = 0; i < saturation.size(); ++i) {
    out.mask.data[i] = passes(saturation.data[i], t, spec.polarity) ? 1 : 0;
  }
  return out;
}

MaskedPlane mask_hue(const RealPlane& hue, const BinaryMask& mask) {
  if (!hue.same_shape(mask)) throw Error(ErrorCode::DimensionMismatch, "hue plane and mask differ in size");
  return MaskedPlane{hue, mask};
}

ThresholdOutcome threshold_segment(const MaskedPlane& mp, const ThresholdSpec& spec, const Histogram* precomputed) {
  check_fixed(spec);
  if (!mp.values.same_shape(mp.valid)) throw Error(ErrorCode::DimensionMismatch, "masked plane is inconsistent");
  ThresholdOutcome out{BinaryMask(mp.width(), mp.height()), std::nullopt, false};
  if (mp.valid_count() == 0) return out;

  double t = spec.value;
  if (spec.mode == ThresholdMode::Otsu) {
    OtsuResult r = precomputed ? otsu_threshold(*precomputed)
                               : otsu_threshold(histogram(mp, spec.levels, spec.lo, spec.hi));
    t = r.threshold;
    out.degenerate = r.degenerate;
  }
  out.threshold = t;
  for (std::size_t i = 0; i < mp.values.size(); ++i) {
    out.mask.data[i] = (mp.valid.data[i] && passes(mp.values.data[i], t, spec.polarity)) ? 1 : 0;
  }
  return out;
}

LabeledRegions label_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width;
  const int h = mask.height;
  Plane<std::uint32_t> provisional(w, h, 0);
  DisjointSet sets;
  sets.make();  // slot 0 is background

  const bool eight = connectivity == Connectivity::Eight;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::uint32_t neighbours[4];
      int count = 0;
      auto visit = [&](int nx, int ny) {
        if (mask.contains(nx, ny) && provisional.at(nx, ny)) neighbours[count++] = provisional.at(nx, ny);
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (eight) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      if (count == 0) {
        provisional.at(x, y) = sets.make();
        continue;
      }
      std::uint32_t lowest = *std::min_element(neighbours, neighbours + count);
      provisional.at(x, y) = lowest;
      for (int i = 0; i < count; ++i) sets.unite(lowest, neighbours[i]);
    }
  }

  LabeledRegions out;
  out.labels = Plane<std::uint32_t>(w, h, 0);
  std::vector<std::uint32_t> final_label;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint32_t p = provisional.at(x, y);
      if (!p) continue;
      std::uint32_t root = sets.find(p);
      if (final_label.size() <= root) final_label.resize(root + 1, 0);
      if (!final_label[root]) {
        final_label[root] = ++out.region_count;
        Spot s;
        s.label = out.region_count;
        s.aabb = {x, y, x, y};
        out.regions.push_back(std::move(s));
      }
      std::uint32_t label = final_label[root];
      out.labels.at(x, y) = label;
      Spot& s = out.regions[label - 1];
      s.pixels.push_back({x, y});
      s.aabb.min_x = std::min(s.aabb.min_x, x);
      s.aabb.max_x = std::max(s.aabb.max_x, x);
      s.aabb.max_y = y;
    }
  }
  return out;
}

LabeledRegions min_spot_filter(const LabeledRegions& lr, std::size_t min_area) {
  if (min_area < 1) throw Error(ErrorCode::InvalidParams, "min_area must be at least 1");
  LabeledRegions out;
  out.labels = Plane<std::uint32_t>(lr.labels.width, lr.labels.height, 0);
  for (const auto& s : lr.regions) {
    if (s.area() < min_area) continue;
    Spot kept = s;
    kept.label = ++out.region_count;
    for (auto p : kept.pixels) out.labels.at(p.x, p.y) = kept.label;
    out.regions.push_back(std::move(kept));
  }
  return out;
}

}  // namespace cropsight::segmentation
