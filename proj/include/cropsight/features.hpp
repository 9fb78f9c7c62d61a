#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "cropsight/plane.hpp"
#include "cropsight/segmentation.hpp"

namespace cropsight::features {

using segmentation::Spot;

struct Contour {
  std::vector<Point> points;  // consecutive points are 8-neighbours
  bool closed = true;
};

struct AxisPair {
  Point major_p1;
  Point major_p2;
  double major_length = 0.0;
  double minor_length = 0.0;
  double orientation = 0.0;  // degrees in [0,180), y axis pointing up
};

struct HullPolygon {
  std::vector<Point> vertices;  // counterclockwise, strictly convex
  double area = 0.0;            // shoelace area of the vertex polygon
};

inline constexpr std::size_t kFeatureCount = 12;

struct FeatureVector {
  int area = 0;
  double major_axis_length = 0.0;
  double minor_axis_length = 0.0;
  double bounding_box_area = 0.0;
  double eccentricity = 0.0;
  double perimeter = 0.0;
  double solidity = 0.0;
  int euler_number = 0;
  double orientation = 0.0;
  double extent = 0.0;
  double equivalent_diameter = 0.0;
  int hull_vertex_count = 0;

  std::array<double, kFeatureCount> values() const noexcept;
  static FeatureVector from_values(const std::array<double, kFeatureCount>& v) noexcept;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

// Moore-neighbour trace of the outer boundary. Starts at the first pixel in
// row-major order and keeps the region on the left (positive shoelace area
// in pixel coordinates). Stops when the first move is about to repeat.
Contour trace_contour(const Spot& spot);

// Major endpoints: farthest pair of contour points, ties to the
// lexicographically smallest pair. Minor length: projection width of the
// pixel set perpendicular to the major axis plus one pixel, capped at the
// major length so that minor <= major always holds.
AxisPair compute_axes(const Spot& spot, const Contour& contour);

double bounding_box_area(const AxisPair& axes) noexcept;
double eccentricity(const AxisPair& axes) noexcept;

// Chain-code length: 1 per axis-aligned step, sqrt(2) per diagonal step.
double perimeter(const Contour& contour) noexcept;

// Monotone chain over pixel centres. Collinear inputs give the two
// outermost points (or one) and area 0.
HullPolygon convex_hull(std::vector<Point> points);
HullPolygon convex_hull(const Spot& spot);

// Number of lattice points inside or on the hull (Pick's theorem).
double hull_pixel_area(const HullPolygon& hull) noexcept;

// area / hull_pixel_area, 1 for degenerate hulls.
double solidity(const Spot& spot, const HullPolygon& hull) noexcept;

// 1 - holes, with holes found as 4-connected background components of the
// bounding box that do not touch its border.
int euler_number(const Spot& spot);
int count_holes(const Spot& spot);

// area / axis-aligned box area.
double extent(const Spot& spot) noexcept;

double equivalent_diameter(double area) noexcept;

FeatureVector extract_features(const Spot& spot);

// CSV export. The header is
// class,area,major,minor,bbox,ecc,perim,solidity,euler,orient,extent,diam,hullv
std::string csv_header();
std::string csv_row(std::string_view class_name, const FeatureVector& f);

}  // namespace cropsight::features
