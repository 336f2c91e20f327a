#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "decomposer/errors.hpp"
#include "decomposer/synthgen/generator.hpp"
#include "decomposer/synthgen/philox.hpp"

namespace decomposer::synth {
namespace {

constexpr std::uint64_t kOriginStream = 7;

using Rgb = std::array<double, 3>;

Rgb random_color(Philox4x32& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

enum class Motif { disk, rect, stripes, ring };

struct Shape {
  Motif motif;
  double cx, cy, r1, r2, angle, period;
  Rgb color, color2;
};

bool inside(const Shape& s, double x, double y, bool& second_color) {
  second_color = false;
  const double dx = x - s.cx;
  const double dy = y - s.cy;
  const double u = dx * std::cos(s.angle) + dy * std::sin(s.angle);
  const double v = -dx * std::sin(s.angle) + dy * std::cos(s.angle);
  switch (s.motif) {
    case Motif::disk:
      return dx * dx + dy * dy <= s.r1 * s.r1;
    case Motif::rect:
      return std::abs(u) <= s.r1 && std::abs(v) <= s.r2;
    case Motif::stripes:
      if (std::abs(u) > s.r1 || std::abs(v) > s.r2) return false;
      second_color = std::fmod(u + 10.0 * s.period, 2.0 * s.period) < s.period;
      return true;
    case Motif::ring: {
      const double d = std::sqrt(dx * dx + dy * dy);
      return d <= s.r1 && d >= s.r1 * 0.6;
    }
  }
  return false;
}

}  // namespace

Image procedural_origin(std::uint64_t seed, int height, int width) {
  if (height <= 0 || width <= 0) throw ArgumentError("procedural_origin: bad frame size");
  Philox4x32 rng(seed, kOriginStream);

  const Rgb c0 = random_color(rng, 0.15, 0.85);
  const Rgb c1 = random_color(rng, 0.15, 0.85);
  const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const std::uint64_t noise_seed = rng.next_u64();

  std::vector<Shape> shapes(static_cast<std::size_t>(rng.uniform_int(8, 14)));
  for (Shape& s : shapes) {
    s.motif = static_cast<Motif>(rng.uniform_int(0, 3));
    s.cx = rng.uniform(0.0, 1.0);
    s.cy = rng.uniform(0.0, 1.0);
    s.r1 = rng.uniform(0.06, 0.3);
    s.r2 = rng.uniform(0.06, 0.3);
    s.angle = rng.uniform(0.0, std::numbers::pi);
    s.period = rng.uniform(0.015, 0.05);
    s.color = random_color(rng, 0.0, 1.0);
    s.color2 = random_color(rng, 0.0, 1.0);
  }

  const std::size_t P = static_cast<std::size_t>(height) * width;
  std::vector<double> planar(3 * P);
  constexpr std::array<double, 5> kCells{32.0, 16.0, 8.0, 4.0, 2.0};
  constexpr std::array<double, 5> kAmps{0.14, 0.10, 0.08, 0.06, 0.04};
  const double cd = std::cos(dir);
  const double sd = std::sin(dir);

  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const double x = (col + 0.5) / width;
      const double y = (row + 0.5) / height;
      const double t = std::min(1.0, std::max(0.0, 0.5 + 0.7 * ((x - 0.5) * cd + (y - 0.5) * sd)));
      Rgb px;
      for (int c = 0; c < 3; ++c) px[c] = c0[c] + (c1[c] - c0[c]) * t;

      for (const Shape& s : shapes) {
        bool second = false;
        if (inside(s, x, y, second)) px = second ? s.color2 : s.color;
      }

      double lum = 0.0;
      for (std::size_t o = 0; o < kCells.size(); ++o) {
        lum += kAmps[o] * value_noise(noise_seed, 3, col + 0.5, row + 0.5, kCells[o]);
      }
      const std::size_t i = static_cast<std::size_t>(row) * width + col;
      for (int c = 0; c < 3; ++c) {
        const double tint = 0.04 * value_noise(noise_seed, c, col + 0.5, row + 0.5, 16.0);
        const double v = std::min(1.0, std::max(0.0, px[c] + lum + tint));
        planar[c * P + i] = std::min(0.95, 0.05 + 0.9 * v);
      }
    }
  }
  return Image::from_values(height, width, 3, std::move(planar));
}

}  // namespace decomposer::synth
