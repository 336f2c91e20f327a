#include "decomposer/synthgen/generator.hpp"

#include <algorithm>
#include <cmath>

#include "decomposer/decomp/compose.hpp"
#include "decomposer/errors.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/synthgen/philox.hpp"

namespace decomposer::synth {
namespace {

double lattice_value(std::uint64_t seed, std::uint32_t channel, std::int64_t ix, std::int64_t iy) {
  const auto out = Philox4x32::block(
      {static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy), channel, 0x6e6f6973u},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return double(out[0]) / 4294967295.0 * 2.0 - 1.0;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

double value_noise(std::uint64_t seed, std::uint32_t channel, double x, double y, double cell) {
  const double gx = x / cell;
  const double gy = y / cell;
  const double fx = std::floor(gx);
  const double fy = std::floor(gy);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = smoothstep(gx - fx);
  const double ty = smoothstep(gy - fy);
  const double v00 = lattice_value(seed, channel, ix, iy);
  const double v10 = lattice_value(seed, channel, ix + 1, iy);
  const double v01 = lattice_value(seed, channel, ix, iy + 1);
  const double v11 = lattice_value(seed, channel, ix + 1, iy + 1);
  const double top = v00 + (v10 - v00) * tx;
  const double bottom = v01 + (v11 - v01) * tx;
  return top + (bottom - top) * ty;
}

ScalarMask render_shadow_mask(const AugmentationParams& params, int height, int width) {
  ScalarMask s(height, width, params.ambient_factor);
  for (const HardShadow& h : params.hard_shadows) {
    const BinaryMask indicator = rasterize_polygon(h.polygon, height, width);
    ScalarMask feathered = to_scalar(indicator);
    if (h.feather_sigma > 0.0) feathered = gaussian_blur(feathered, h.feather_sigma);
    auto dst = s.data();
    const auto f = feathered.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const double cover = std::min(1.0, std::max(0.0, f[i]));
      dst[i] = dst[i] * (1.0 - h.intensity * cover);
    }
  }
  return s;
}

ScalarMask render_light_mask(const AugmentationParams& params, int height, int width) {
  std::vector<double> values(static_cast<std::size_t>(height) * width, 0.0);
  for (const Spotlight& spot : params.spotlights) {
    const double cx = spot.center.x * width;
    const double cy = spot.center.y * height;
    const double inv = 1.0 / (2.0 * spot.radius_sigma * spot.radius_sigma);
    for (int row = 0; row < height; ++row) {
      const double dy = row + 0.5 - cy;
      for (int col = 0; col < width; ++col) {
        const double dx = col + 0.5 - cx;
        values[static_cast<std::size_t>(row) * width + col] +=
            spot.intensity * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return ScalarMask::from_values(height, width, std::move(values));
}

OccluderLayer render_occluders(const AugmentationParams& params, int height, int width,
                               const GeneratorConfig& config) {
  OccluderLayer layer{BinaryMask(height, width, 0), Image(height, width, 3, 0.0),
                      ScalarMask(height, width, 0.0)};
  const std::size_t P = layer.mask.pixels();
  for (const Occluder& o : params.occluders) {
    const BinaryMask shape = o.shape == OccluderShape::ellipse
                                 ? rasterize_ellipse(o.center, o.radius_x, o.radius_y, o.angle,
                                                     height, width)
                                 : rasterize_polygon(o.polygon, height, width);
    for (int row = 0; row < height; ++row) {
      for (int col = 0; col < width; ++col) {
        if (!shape.at(row, col)) continue;
        const std::size_t i = static_cast<std::size_t>(row) * width + col;
        layer.mask.set(i, true);
        layer.alpha.data()[i] = o.alpha;
        for (int c = 0; c < 3; ++c) {
          const double n = value_noise(o.texture_seed, c, col + 0.5, row + 0.5, config.texture_cell);
          const double v = o.color[c] + config.texture_amplitude * n;
          layer.texture.data()[c * P + i] = std::min(1.0, std::max(0.0, v));
        }
      }
    }
  }
  return layer;
}

SceneSample generate_sequence(const Image& origin, std::uint64_t base_seed,
                              const GeneratorConfig& config) {
  if (origin.empty()) throw ArgumentError("generate_sequence: empty origin");
  GeneratorConfig frame = config;
  frame.height = origin.height();
  frame.width = origin.width();
  frame.validate();

  const int H = origin.height();
  const int W = origin.width();
  const int C = origin.channels();
  const std::size_t P = origin.pixels();

  SceneSample sample;
  sample.origin = origin;
  sample.seed = base_seed;
  for (int i = 0; i < frame.num_views; ++i) {
    AugmentationParams params = sample_params(base_seed + static_cast<std::uint64_t>(i), frame);
    ScalarMask shadow = render_shadow_mask(params, H, W);
    ScalarMask light = render_light_mask(params, H, W);
    OccluderLayer occ = render_occluders(params, H, W, frame);

    const Image sl = clamp01(sl_compose(origin, shadow, light));
    std::vector<double> content(origin.size(), 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      if (!occ.mask.data()[p]) continue;
      const double a = occ.alpha.data()[p];
      for (int c = 0; c < C; ++c) {
        // Single-channel origins take the occluder's first texture channel.
        const double tex = occ.texture.data()[std::min(c, 2) * P + p];
        content[c * P + p] = a * tex + (1.0 - a) * sl.data()[c * P + p];
      }
    }
    Image occ_content = Image::from_values(H, W, C, std::move(content));

    sample.views.push_back(clamp01(compose(origin, shadow, light, occ.mask, occ_content)));
    sample.gt_shadow.push_back(std::move(shadow));
    sample.gt_light.push_back(std::move(light));
    sample.gt_occ_mask.push_back(std::move(occ.mask));
    sample.gt_occ_content.push_back(std::move(occ_content));
    sample.params.push_back(std::move(params));
  }
  return sample;
}

}  // namespace decomposer::synth
