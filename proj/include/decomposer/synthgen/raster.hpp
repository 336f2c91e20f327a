#pragma once

#include <span>

#include "decomposer/imgcore/image.hpp"

namespace decomposer::synth {

// Normalized image coordinates: x in [0, 1] spans the width, y the height.
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Pixel (row, col) is inside when its center ((col + 0.5) / W, (row + 0.5) / H)
// is inside the shape. Polygons use the even-odd rule and need at least three
// distinct vertices (ArgumentError otherwise).
BinaryMask rasterize_polygon(std::span<const Point> vertices, int height, int width);

// Ellipse with semi-axes (rx, ry) in normalized units, rotated by `angle` radians.
BinaryMask rasterize_ellipse(Point center, double rx, double ry, double angle, int height, int width);

// Absolute shoelace area in normalized units.
double polygon_area(std::span<const Point> vertices);

}  // namespace decomposer::synth
