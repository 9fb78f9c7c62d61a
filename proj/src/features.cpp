#include "cropsight/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "cropsight/error.hpp"

namespace cropsight::features {

namespace {

// Clockwise on screen (y down), starting west.
constexpr Point kRing[8] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kRing[i].x == dx && kRing[i].y == dy) return i;
  }
  return -1;
}

// Spot pixels rasterised into its bounding box with a one-pixel margin.
class LocalMask {
 public:
  explicit LocalMask(const Spot& spot)
      : origin_{spot.aabb.min_x - 1, spot.aabb.min_y - 1},
        plane_(spot.aabb.width() + 2, spot.aabb.height() + 2, 0) {
    for (auto p : spot.pixels) plane_.at(p.x - origin_.x, p.y - origin_.y) = 1;
  }

  bool test(Point p) const noexcept {
    int lx = p.x - origin_.x;
    int ly = p.y - origin_.y;
    return plane_.contains(lx, ly) && plane_.at(lx, ly) != 0;
  }

 private:
  Point origin_;
  BoolPlane plane_;
};

std::int64_t dist2(Point a, Point b) {
  std::int64_t dx = b.x - a.x;
  std::int64_t dy = b.y - a.y;
  return dx * dx + dy * dy;
}

std::int64_t cross(Point o, Point a, Point b) {
  return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) - static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "area", "major", "minor", "bbox", "ecc", "perim", "solidity", "euler", "orient", "extent", "diam", "hullv"};

std::array<double, kFeatureCount> FeatureVector::values() const noexcept {
  return {static_cast<double>(area), major_axis_length, minor_axis_length, bounding_box_area, eccentricity,
          perimeter, solidity, static_cast<double>(euler_number), orientation, extent, equivalent_diameter,
          static_cast<double>(hull_vertex_count)};
}

FeatureVector FeatureVector::from_values(const std::array<double, kFeatureCount>& v) noexcept {
  FeatureVector f;
  f.area = static_cast<int>(std::lround(v[0]));
  f.major_axis_length = v[1];
  f.minor_axis_length = v[2];
  f.bounding_box_area = v[3];
  f.eccentricity = v[4];
  f.perimeter = v[5];
  f.solidity = v[6];
  f.euler_number = static_cast<int>(std::lround(v[7]));
  f.orientation = v[8];
  f.extent = v[9];
  f.equivalent_diameter = v[10];
  f.hull_vertex_count = static_cast<int>(std::lround(v[11]));
  return f;
}

Contour trace_contour(const Spot& spot) {
  if (spot.pixels.empty()) throw Error(ErrorCode::InvalidParams, "cannot trace an empty spot");
  LocalMask mask(spot);
  const Point start = spot.pixels.front();

  // Returns the next boundary pixel and the direction (from it) of the
  // background cell it was entered from.
  auto step = [&](Point c, int back) -> std::pair<Point, int> {
    for (int i = 1; i <= 8; ++i) {
      int d = (back + i) % 8;
      Point n{c.x + kRing[d].x, c.y + kRing[d].y};
      if (mask.test(n)) {
        const Point& pd = kRing[(d + 7) % 8];
        Point prev{c.x + pd.x, c.y + pd.y};
        return {n, ring_index(prev.x - n.x, prev.y - n.y)};
      }
    }
    return {c, back};
  };

  Contour contour;
  contour.points.push_back(start);
  auto [first, first_back] = step(start, 0);
  if (first == start) return contour;

  Point cur = first;
  int back = first_back;
  while (true) {
    contour.points.push_back(cur);
    auto [next, next_back] = step(cur, back);
    if (next == start) {
      // Jacob's criterion: stop once the opening move would repeat.
      auto [after, after_back] = step(next, next_back);
      if (after == first && after_back == first_back) break;
      contour.points.push_back(next);
      cur = after;
      back = after_back;
      continue;
    }
    cur = next;
    back = next_back;
  }
  return contour;
}

AxisPair compute_axes(const Spot& spot, const Contour& contour) {
  if (spot.pixels.empty()) throw Error(ErrorCode::InvalidParams, "cannot measure an empty spot");
  std::vector<Point> pts = contour.points;
  if (pts.empty()) pts = spot.pixels;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  AxisPair axes;
  axes.major_p1 = axes.major_p2 = pts.front();
  std::int64_t best = 0;
  // Sorted input plus strict comparison keeps the lexicographically
  // smallest (p1, p2) among equally long pairs.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      auto d = dist2(pts[i], pts[j]);
      if (d > best) {
        best = d;
        axes.major_p1 = pts[i];
        axes.major_p2 = pts[j];
      }
    }
  }
  if (best == 0) {
    axes.major_length = 1.0;
    axes.minor_length = 1.0;
    axes.orientation = 0.0;
    return axes;
  }

  axes.major_length = std::sqrt(static_cast<double>(best));
  const std::int64_t dx = axes.major_p2.x - axes.major_p1.x;
  const std::int64_t dy = axes.major_p2.y - axes.major_p1.y;
  std::int64_t lo = INT64_MAX;
  std::int64_t hi = INT64_MIN;
  for (auto p : spot.pixels) {
    std::int64_t c = dx * p.y - dy * p.x;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  const double width = static_cast<double>(hi - lo) / axes.major_length + 1.0;
  axes.minor_length = std::min(width, axes.major_length);

  double angle = std::atan2(-static_cast<double>(dy), static_cast<double>(dx)) * 180.0 / std::numbers::pi;
  if (angle < 0.0) angle += 180.0;
  if (angle >= 180.0) angle -= 180.0;
  axes.orientation = angle == 0.0 ? 0.0 : angle;  // no negative zero
  return axes;
}

double bounding_box_area(const AxisPair& axes) noexcept { return axes.major_length * axes.minor_length; }

double eccentricity(const AxisPair& axes) noexcept {
  if (!(axes.major_length > 0.0)) return 1.0;
  double e = axes.minor_length / axes.major_length;
  return std::clamp(e, std::numeric_limits<double>::min(), 1.0);
}

double perimeter(const Contour& contour) noexcept {
  const auto& pts = contour.points;
  if (pts.size() < 2) return 0.0;
  std::size_t straight = 0;
  std::size_t diagonal = 0;
  const std::size_t steps = contour.closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % pts.size()];
    if (a.x != b.x && a.y != b.y) ++diagonal;
    else ++straight;
  }
  return static_cast<double>(straight) + std::numbers::sqrt2 * static_cast<double>(diagonal);
}

HullPolygon convex_hull(std::vector<Point> pts) {
  HullPolygon hull;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) {
    hull.vertices = pts;
    return hull;
  }
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() <= 2) {
    // Collinear: keep the two outermost points.
    hull.vertices = {pts.front(), pts.back()};
    return hull;
  }
  std::int64_t twice = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Point& a = h[i];
    const Point& b = h[(i + 1) % h.size()];
    twice += static_cast<std::int64_t>(a.x) * b.y - static_cast<std::int64_t>(b.x) * a.y;
  }
  hull.vertices = std::move(h);
  hull.area = static_cast<double>(twice) / 2.0;
  return hull;
}

HullPolygon convex_hull(const Spot& spot) { return convex_hull(spot.pixels); }

double hull_pixel_area(const HullPolygon& hull) noexcept {
  const auto& v = hull.vertices;
  if (v.empty()) return 0.0;
  if (v.size() == 1) return 1.0;
  if (v.size() == 2) return static_cast<double>(std::gcd(std::abs(v[1].x - v[0].x), std::abs(v[1].y - v[0].y)) + 1);
  std::int64_t boundary = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    boundary += std::gcd(std::abs(b.x - a.x), std::abs(b.y - a.y));
  }
  // Pick: A = I + B/2 - 1, so I + B = A + B/2 + 1.
  return hull.area + static_cast<double>(boundary) / 2.0 + 1.0;
}

double solidity(const Spot& spot, const HullPolygon& hull) noexcept {
  if (hull.vertices.size() <= 2) return 1.0;
  double covered = hull_pixel_area(hull);
  if (!(covered > 0.0)) return 1.0;
  return std::min(1.0, static_cast<double>(spot.area()) / covered);
}

int count_holes(const Spot& spot) {
  if (spot.pixels.empty()) return 0;
  const auto& box = spot.aabb;
  segmentation::BinaryMask background(box.width(), box.height(), 1);
  for (auto p : spot.pixels) background.at(p.x - box.min_x, p.y - box.min_y) = 0;
  auto regions = segmentation::label_components(background, segmentation::Connectivity::Four);
  int holes = 0;
  for (const auto& r : regions.regions) {
    bool touches = r.aabb.min_x == 0 || r.aabb.min_y == 0 || r.aabb.max_x == box.width() - 1 ||
                   r.aabb.max_y == box.height() - 1;
    if (!touches) ++holes;
  }
  return holes;
}

int euler_number(const Spot& spot) { return 1 - count_holes(spot); }

double extent(const Spot& spot) noexcept {
  if (spot.pixels.empty()) return 0.0;
  return static_cast<double>(spot.area()) / (static_cast<double>(spot.aabb.width()) * spot.aabb.height());
}

double equivalent_diameter(double area) noexcept { return std::sqrt(4.0 * area / std::numbers::pi); }

FeatureVector extract_features(const Spot& spot) {
  if (spot.pixels.empty()) throw Error(ErrorCode::InvalidParams, "cannot measure an empty spot");
  const Contour contour = trace_contour(spot);
  const AxisPair axes = compute_axes(spot, contour);
  const HullPolygon hull = convex_hull(spot);

  FeatureVector f;
  f.area = static_cast<int>(spot.area());
  f.major_axis_length = axes.major_length;
  f.minor_axis_length = axes.minor_length;
  f.bounding_box_area = bounding_box_area(axes);
  f.eccentricity = eccentricity(axes);
  f.perimeter = perimeter(contour);
  f.solidity = solidity(spot, hull);
  f.euler_number = euler_number(spot);
  f.orientation = axes.orientation;
  f.extent = extent(spot);
  f.equivalent_diameter = equivalent_diameter(static_cast<double>(spot.area()));
  f.hull_vertex_count = static_cast<int>(hull.vertices.size());
  return f;
}

std::string csv_header() { return "class,area,major,minor,bbox,ecc,perim,solidity,euler,orient,extent,diam,hullv"; }

std::string csv_row(std::string_view class_name, const FeatureVector& f) {
  std::string row(class_name);
  row += "," + std::to_string(f.area);
  row += "," + fmt(f.major_axis_length);
  row += "," + fmt(f.minor_axis_length);
  row += "," + fmt(f.bounding_box_area);
  row += "," + fmt(f.eccentricity);
  row += "," + fmt(f.perimeter);
  row += "," + fmt(f.solidity);
  row += "," + std::to_string(f.euler_number);
  row += "," + fmt(f.orientation);
  row += "," + fmt(f.extent);
  row += "," + fmt(f.equivalent_diameter);
  row += "," + std::to_string(f.hull_vertex_count);
  return row;
}

}  // namespace cropsight::features
