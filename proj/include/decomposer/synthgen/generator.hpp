#pragma once

#include <cstdint>
#include <vector>

#include "decomposer/imgcore/image.hpp"
#include "decomposer/synthgen/params.hpp"

namespace decomposer::synth {

// One original image, N distorted views and the components that produced them.
struct SceneSample {
  Image origin;
  std::vector<Image> views;
  std::vector<ScalarMask> gt_shadow;
  std::vector<ScalarMask> gt_light;
  std::vector<BinaryMask> gt_occ_mask;
  std::vector<Image> gt_occ_content;
  std::vector<AugmentationParams> params;
  std::uint64_t seed = 0;

  int num_views() const { return static_cast<int>(views.size()); }
};

// ambient * prod_k (1 - intensity_k * feathered_indicator_k); values in (0, 1].
ScalarMask render_shadow_mask(const AugmentationParams& params, int height, int width);

// Sum of intensity * exp(-d^2 / (2 sigma^2)) blobs, clamped to [0, 1]. Pixel
// (row, col) sits at (col + 0.5, row + 0.5); a blob center (cx, cy) sits at
// (cx * W, cy * H).
ScalarMask render_light_mask(const AugmentationParams& params, int height, int width);

// Occluders painted in list order (later ones on top).
struct OccluderLayer {
  BinaryMask mask;
  Image texture;     // flat color + value noise inside the mask, zero outside
  ScalarMask alpha;  // alpha of the topmost occluder, zero outside
};

OccluderLayer render_occluders(const AugmentationParams& params, int height, int width,
                               const GeneratorConfig& config);

// N views with per-view params drawn from seed base_seed + view index. Each
// view equals clamp01(compose(origin, shadow, light, mask, content)) where
// content = alpha * texture + (1 - alpha) * clamp01(origin * shadow + light)
// inside the mask. The frame size comes from `origin`.
SceneSample generate_sequence(const Image& origin, std::uint64_t base_seed,
                              const GeneratorConfig& config);

// Photo-like RGB test image: smooth color field, multi-octave value noise,
// random flat and striped shapes. Values stay inside [0.05, 0.95].
Image procedural_origin(std::uint64_t seed, int height, int width);

// Smooth value noise in [-1, 1] on a lattice with `cell` pixel spacing;
// random access through the counter-based generator.
double value_noise(std::uint64_t seed, std::uint32_t channel, double x, double y, double cell);

}  // namespace decomposer::synth
