#include "decomposer/synthgen/raster.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "decomposer/errors.hpp"

namespace decomposer::synth {
namespace {

std::size_t distinct_vertices(std::span<const Point> v) {
  std::vector<Point> seen;
  for (const Point& p : v) {
    if (std::find(seen.begin(), seen.end(), p) == seen.end()) seen.push_back(p);
  }
  return seen.size();
}

}  // namespace

BinaryMask rasterize_polygon(std::span<const Point> vertices, int height, int width) {
  if (distinct_vertices(vertices) < 3) {
    throw ArgumentError("polygon needs at least three distinct vertices");
  }
  BinaryMask mask(height, width, 0);
  const std::size_t n = vertices.size();
  std::vector<double> crossings;
  for (int row = 0; row < height; ++row) {
    const double py = (row + 0.5) / height;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point a = vertices[i];
      const Point b = vertices[j];
      if ((a.y > py) != (b.y > py)) {
        crossings.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      for (int col = 0; col < width; ++col) {
        const double px = (col + 0.5) / width;
        if (px >= crossings[k] && px < crossings[k + 1]) mask.set(row, col, true);
      }
    }
  }
  return mask;
}

BinaryMask rasterize_ellipse(Point center, double rx, double ry, double angle, int height, int width) {
  if (!(rx > 0.0) || !(ry > 0.0)) throw ArgumentError("ellipse radii must be positive");
  BinaryMask mask(height, width, 0);
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  for (int row = 0; row < height; ++row) {
    const double dy = (row + 0.5) / height - center.y;
    for (int col = 0; col < width; ++col) {
      const double dx = (col + 0.5) / width - center.x;
      const double u = (dx * ca + dy * sa) / rx;
      const double v = (-dx * sa + dy * ca) / ry;
      if (u * u + v * v <= 1.0) mask.set(row, col, true);
    }
  }
  return mask;
}

double polygon_area(std::span<const Point> v) {
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return std::abs(twice) / 2.0;
}

}  // namespace decomposer::synth
