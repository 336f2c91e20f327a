#include "decomposer/pseudolabel/pseudolabel.hpp"

#include <algorithm>

#include "decomposer/errors.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/simd/kernels.hpp"

namespace decomposer::pseudo {

void PseudoLabelConfig::validate() const {
  if (!(blur_sigma > 0.0)) throw ArgumentError("PseudoLabelConfig.blur_sigma must be > 0");
  if (!(occ_threshold > 0.0 && occ_threshold < 1.0)) {
    throw ArgumentError("PseudoLabelConfig.occ_threshold must lie in (0, 1)");
  }
  if (!(shadow_floor > 0.0 && shadow_floor < 1.0)) {
    throw ArgumentError("PseudoLabelConfig.shadow_floor must lie in (0, 1)");
  }
}

ScalarMask light_pseudo_mask(const Image& view, const Image& origin, const PseudoLabelConfig& cfg) {
  cfg.validate();
  require_same_shape(view, origin, "light_pseudo_mask");
  return to_gray(gaussian_blur(subtract_clip(view, origin), cfg.blur_sigma));
}

ScalarMask shadow_pseudo_mask(const Image& view, const Image& origin, const PseudoLabelConfig& cfg) {
  cfg.validate();
  require_same_shape(view, origin, "shadow_pseudo_mask");
  ScalarMask darkening = to_gray(gaussian_blur(subtract_clip(origin, view), cfg.blur_sigma));
  for (double& v : darkening.data()) v = std::min(1.0, std::max(cfg.shadow_floor, 1.0 - v));
  return darkening;
}

Image sl_pseudo_target(const Image& origin, const ScalarMask& shadow, const ScalarMask& light) {
  require_same_extent(origin, shadow, "sl_pseudo_target");
  require_same_extent(origin, light, "sl_pseudo_target");
  const auto& k = simd::kernels();
  std::vector<double> out(origin.size());
  for (int c = 0; c < origin.channels(); ++c) {
    k.sl_compose(origin.plane(c).data(), shadow.data().data(), light.data().data(),
                 out.data() + c * origin.pixels(), origin.pixels());
  }
  return Image::from_values(origin.height(), origin.width(), origin.channels(), std::move(out));
}

BinaryMask occlusion_pseudo_mask(const Image& view, const Image& sl_target,
                                 const PseudoLabelConfig& cfg) {
  cfg.validate();
  require_same_shape(view, sl_target, "occlusion_pseudo_mask");
  return threshold(to_gray(abs_diff(sl_target, view)), cfg.occ_threshold);
}

PseudoLabels make_pseudo_labels(const Image& origin, std::span<const Image> views,
                                const PseudoLabelConfig& cfg) {
  cfg.validate();
  PseudoLabels labels;
  for (const Image& view : views) {
    ScalarMask s = shadow_pseudo_mask(view, origin, cfg);
    ScalarMask l = light_pseudo_mask(view, origin, cfg);
    Image sl = sl_pseudo_target(origin, s, l);
    labels.occ_mask.push_back(occlusion_pseudo_mask(view, sl, cfg));
    labels.shadow.push_back(std::move(s));
    labels.light.push_back(std::move(l));
    labels.sl_target.push_back(std::move(sl));
  }
  return labels;
}

}  // namespace decomposer::pseudo
