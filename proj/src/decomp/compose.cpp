#include "decomposer/decomp/compose.hpp"

#include <vector>

#include "decomposer/simd/kernels.hpp"

namespace decomposer {

Image sl_compose(const Image& oi, const ScalarMask& shadow, const ScalarMask& light) {
  require_same_extent(oi, shadow, "sl_compose");
  require_same_extent(oi, light, "sl_compose");
  const auto& k = simd::kernels();
  std::vector<double> out(oi.size());
  for (int c = 0; c < oi.channels(); ++c) {
    k.sl_compose(oi.plane(c).data(), shadow.data().data(), light.data().data(),
                 out.data() + c * oi.pixels(), oi.pixels());
  }
  return Image::unclamped(oi.height(), oi.width(), oi.channels(), std::move(out));
}

Image compose(const Image& oi, const ScalarMask& shadow, const ScalarMask& light,
              const ScalarMask& mask, const Image& occ) {
  require_same_extent(oi, mask, "compose");
  require_same_shape(oi, occ, "compose");
  Image out = sl_compose(oi, shadow, light);
  const auto& k = simd::kernels();
  for (int c = 0; c < oi.channels(); ++c) {
    auto plane = out.plane(c);
    k.blend(plane.data(), occ.plane(c).data(), mask.data().data(), plane.data(), oi.pixels());
  }
  return out;
}

Image compose(const Image& oi, const ScalarMask& shadow, const ScalarMask& light,
              const BinaryMask& mask, const Image& occ) {
  return compose(oi, shadow, light, to_scalar(mask), occ);
}

}  // namespace decomposer
