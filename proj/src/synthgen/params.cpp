#include "decomposer/synthgen/params.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "decomposer/errors.hpp"
#include "decomposer/synthgen/philox.hpp"

namespace decomposer::synth {
namespace {

constexpr int kOccluderAttempts = 8;

void check_range(const Range& r, double lo, double hi, bool open_lo, const char* name) {
  const bool lo_ok = open_lo ? r.lo > lo : r.lo >= lo;
  if (!(lo_ok && r.hi <= hi && r.lo <= r.hi)) {
    throw ArgumentError(std::string("GeneratorConfig.") + name + " must satisfy " +
                        std::to_string(lo) + (open_lo ? " < " : " <= ") + "lo <= hi <= " +
                        std::to_string(hi));
  }
}

void check_count(const CountRange& c, const char* name) {
  if (c.min < 0 || c.max < c.min) {
    throw ArgumentError(std::string("GeneratorConfig.") + name + " must satisfy 0 <= min <= max");
  }
}

Point clamp_point(Point p) {
  return {std::min(1.0, std::max(0.0, p.x)), std::min(1.0, std::max(0.0, p.y))};
}

// Star-shaped polygon around `center`: one vertex per jittered angular sector.
std::vector<Point> random_polygon(Philox4x32& rng, Point center, double radius) {
  const int k = rng.uniform_int(3, 6);
  const double step = 2.0 * std::numbers::pi / k;
  const double base = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Point> out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    const double a = base + j * step + rng.uniform(-0.3, 0.3) * step;
    const double r = radius * rng.uniform(0.6, 1.0);
    out.push_back(clamp_point({center.x + r * std::cos(a), center.y + r * std::sin(a)}));
  }
  return out;
}

bool has_three_distinct(const std::vector<Point>& v) {
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool repeat = false;
    for (std::size_t j = 0; j < i; ++j) repeat = repeat || v[j] == v[i];
    if (!repeat) ++distinct;
  }
  return distinct >= 3;
}

BinaryMask occluder_raster(const Occluder& o, int height, int width) {
  if (o.shape == OccluderShape::ellipse) {
    return rasterize_ellipse(o.center, o.radius_x, o.radius_y, o.angle, height, width);
  }
  return rasterize_polygon(o.polygon, height, width);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (height <= 0 || width <= 0) throw ArgumentError("GeneratorConfig: frame size must be positive");
  if (num_views < 1) throw ArgumentError("GeneratorConfig.num_views must be >= 1");
  check_range(ambient, 0.3, 1.0, false, "ambient");
  check_count(shadow_count, "shadow_count");
  check_range(shadow_intensity, 0.2, 0.8, false, "shadow_intensity");
  check_range(shadow_radius, 0.0, 1.0, true, "shadow_radius");
  if (feather_sigma < 0.0) throw ArgumentError("GeneratorConfig.feather_sigma must be >= 0");
  check_count(spotlight_count, "spotlight_count");
  check_range(spotlight_intensity, 0.2, 1.0, false, "spotlight_intensity");
  check_range(spotlight_sigma, 0.0, 1e6, true, "spotlight_sigma");
  check_count(occluder_count, "occluder_count");
  check_range(occluder_radius, 0.0, 1.0, true, "occluder_radius");
  if (opaque_fraction < 0.0 || opaque_fraction > 1.0) {
    throw ArgumentError("GeneratorConfig.opaque_fraction must lie in [0, 1]");
  }
  check_range(occluder_alpha, 0.0, 1.0, true, "occluder_alpha");
  if (!(max_occlusion_coverage > 0.0 && max_occlusion_coverage <= 1.0)) {
    throw ArgumentError("GeneratorConfig.max_occlusion_coverage must lie in (0, 1]");
  }
  if (texture_amplitude < 0.0) throw ArgumentError("GeneratorConfig.texture_amplitude must be >= 0");
  if (!(texture_cell > 0.0)) throw ArgumentError("GeneratorConfig.texture_cell must be > 0");
}

AugmentationParams sample_params(std::uint64_t seed, const GeneratorConfig& config) {
  config.validate();
  Philox4x32 rng(seed);
  AugmentationParams p;
  p.ambient_factor = rng.uniform(config.ambient.lo, config.ambient.hi);

  const int shadows = rng.uniform_int(config.shadow_count.min, config.shadow_count.max);
  for (int s = 0; s < shadows; ++s) {
    HardShadow h;
    do {
      const Point c{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
      h.polygon = random_polygon(rng, c, rng.uniform(config.shadow_radius.lo, config.shadow_radius.hi));
    } while (!has_three_distinct(h.polygon));
    h.intensity = rng.uniform(config.shadow_intensity.lo, config.shadow_intensity.hi);
    h.feather_sigma = config.feather_sigma;
    p.hard_shadows.push_back(std::move(h));
  }

  const int spots = rng.uniform_int(config.spotlight_count.min, config.spotlight_count.max);
  for (int s = 0; s < spots; ++s) {
    Spotlight l;
    l.center = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    l.radius_sigma = rng.uniform(config.spotlight_sigma.lo, config.spotlight_sigma.hi);
    l.intensity = rng.uniform(config.spotlight_intensity.lo, config.spotlight_intensity.hi);
    p.spotlights.push_back(l);
  }

  const int occluders = rng.uniform_int(config.occluder_count.min, config.occluder_count.max);
  BinaryMask covered(config.height, config.width, 0);
  const double budget = config.max_occlusion_coverage * double(covered.pixels());
  std::size_t covered_count = 0;
  for (int k = 0; k < occluders; ++k) {
    for (int attempt = 0; attempt < kOccluderAttempts; ++attempt) {
      Occluder o;
      o.shape = rng.uniform() < 0.5 ? OccluderShape::ellipse : OccluderShape::polygon;
      o.center = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
      if (o.shape == OccluderShape::ellipse) {
        o.radius_x = rng.uniform(config.occluder_radius.lo, config.occluder_radius.hi);
        o.radius_y = rng.uniform(config.occluder_radius.lo, config.occluder_radius.hi);
        o.angle = rng.uniform(0.0, std::numbers::pi);
      } else {
        do {
          o.polygon = random_polygon(rng, o.center,
                                     rng.uniform(config.occluder_radius.lo, config.occluder_radius.hi));
        } while (!has_three_distinct(o.polygon));
      }
      o.color = {rng.uniform(), rng.uniform(), rng.uniform()};
      o.alpha = rng.uniform() < config.opaque_fraction
                    ? 1.0
                    : rng.uniform(config.occluder_alpha.lo, config.occluder_alpha.hi);
      o.texture_seed = rng.next_u64();

      const BinaryMask shape = occluder_raster(o, config.height, config.width);
      std::size_t added = 0;
      for (std::size_t i = 0; i < shape.pixels(); ++i) {
        added += (shape.data()[i] && !covered.data()[i]) ? 1 : 0;
      }
      if (double(covered_count + added) <= budget) {
        for (std::size_t i = 0; i < shape.pixels(); ++i) {
          if (shape.data()[i]) covered.set(i, true);
        }
        covered_count += added;
        p.occluders.push_back(std::move(o));
        break;
      }
    }
  }
  return p;
}

}  // namespace decomposer::synth
