#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cropsight {

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

// Row-major 2-D raster.
template <typename T>
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }

  T& at(int x, int y) noexcept { return data[index(x, y)]; }
  const T& at(int x, int y) const noexcept { return data[index(x, y)]; }

  template <typename U>
  bool same_shape(const Plane<U>& other) const noexcept {
    return width == other.width && height == other.height;
  }

  friend bool operator==(const Plane&, const Plane&) = default;
};

// Booleans are stored as bytes so planes stay contiguous and addressable.
using BoolPlane = Plane<std::uint8_t>;
using RealPlane = Plane<double>;

}  // namespace cropsight
