#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "decomposer/synthgen/raster.hpp"

namespace decomposer::synth {

struct HardShadow {
  std::vector<Point> polygon;  // 3-6 vertices
  double intensity = 0.5;      // [0.2, 0.8]; interior is scaled by 1 - intensity
  double feather_sigma = 4.0;  // pixels; 0 disables feathering
};

struct Spotlight {
  Point center;
  double radius_sigma = 10.0;  // pixels
  double intensity = 0.5;      // [0.2, 1.0]
};

enum class OccluderShape { ellipse, polygon };

struct Occluder {
  OccluderShape shape = OccluderShape::ellipse;
  // Ellipse geometry (normalized units, angle in radians).
  Point center;
  double radius_x = 0.1;
  double radius_y = 0.1;
  double angle = 0.0;
  // Polygon geometry.
  std::vector<Point> polygon;

  std::array<double, 3> color{0.5, 0.5, 0.5};
  double alpha = 1.0;  // (0, 1]
  std::uint64_t texture_seed = 0;
};

struct AugmentationParams {
  double ambient_factor = 1.0;  // [0.3, 1.0]
  std::vector<HardShadow> hard_shadows;
  std::vector<Spotlight> spotlights;
  std::vector<Occluder> occluders;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct CountRange {
  int min = 0;
  int max = 0;
};

// Distortion ranges. Every range must sit inside the limits checked by
// validate(); the defaults are artifact choices.
struct GeneratorConfig {
  int height = 128;
  int width = 128;
  int num_views = 10;

  Range ambient{0.3, 1.0};

  CountRange shadow_count{0, 2};
  Range shadow_intensity{0.2, 0.8};
  Range shadow_radius{0.15, 0.35};  // normalized polygon radius
  double feather_sigma = 4.0;

  CountRange spotlight_count{0, 2};
  Range spotlight_intensity{0.2, 0.6};
  Range spotlight_sigma{6.0, 16.0};  // pixels

  CountRange occluder_count{0, 2};
  Range occluder_radius{0.06, 0.18};  // normalized
  double opaque_fraction = 0.5;       // probability an occluder has alpha 1
  Range occluder_alpha{0.7, 1.0};     // alpha of the translucent ones
  double max_occlusion_coverage = 0.4;
  double texture_amplitude = 0.05;
  double texture_cell = 8.0;  // pixels between value-noise lattice points

  // Throws ArgumentError for inverted or out-of-limit ranges.
  void validate() const;
};

// Deterministic for a fixed seed. Counts are uniform over the configured
// ranges; occluders that would push the rasterized union past
// max_occlusion_coverage are redrawn a bounded number of times, then dropped.
AugmentationParams sample_params(std::uint64_t seed, const GeneratorConfig& config);

}  // namespace decomposer::synth
