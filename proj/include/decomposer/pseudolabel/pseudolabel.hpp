#pragma once

#include <span>
#include <vector>

#include "decomposer/imgcore/image.hpp"

// Weakly supervised targets computed from a view and the original image
// only. This library links against imgcore alone and has no access to the
// generator's ground-truth masks.
namespace decomposer::pseudo {

struct PseudoLabelConfig {
  double blur_sigma = 5.0;       // pixels
  double occ_threshold = 0.15;   // tau in (0, 1)
  double shadow_floor = 0.02;    // epsilon in (0, 1)

  void validate() const;
};

// gray(blur(max(view - origin, 0))), clamped to [0, 1].
ScalarMask light_pseudo_mask(const Image& view, const Image& origin, const PseudoLabelConfig& cfg);

// 1 - gray(blur(max(origin - view, 0))), clamped to [shadow_floor, 1].
// max(origin - view, 0) equals max(invert(view) - invert(origin), 0).
ScalarMask shadow_pseudo_mask(const Image& view, const Image& origin, const PseudoLabelConfig& cfg);

// clamp01(origin * s + l) with the masks broadcast over channels.
Image sl_pseudo_target(const Image& origin, const ScalarMask& shadow, const ScalarMask& light);

// threshold(gray(|sl_target - view|), tau). `sl_target` may come from the
// pseudo masks or from any other shadow/light estimate.
BinaryMask occlusion_pseudo_mask(const Image& view, const Image& sl_target,
                                 const PseudoLabelConfig& cfg);

struct PseudoLabels {
  std::vector<ScalarMask> shadow;
  std::vector<ScalarMask> light;
  std::vector<Image> sl_target;
  std::vector<BinaryMask> occ_mask;

  int views() const { return static_cast<int>(shadow.size()); }
};

PseudoLabels make_pseudo_labels(const Image& origin, std::span<const Image> views,
                                const PseudoLabelConfig& cfg);

}  // namespace decomposer::pseudo
