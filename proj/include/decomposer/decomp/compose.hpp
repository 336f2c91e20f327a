#pragma once

#include "decomposer/imgcore/image.hpp"

namespace decomposer {

// oi * s + l with the one-channel masks broadcast over color channels.
// Not clamped.
Image sl_compose(const Image& oi, const ScalarMask& shadow, const ScalarMask& light);

// sl_compose(oi, s, l) * (1 - m) + occ * m. A binary m replaces masked
// pixels with occluder content exactly. Not clamped.
Image compose(const Image& oi, const ScalarMask& shadow, const ScalarMask& light,
              const ScalarMask& mask, const Image& occ);
Image compose(const Image& oi, const ScalarMask& shadow, const ScalarMask& light,
              const BinaryMask& mask, const Image& occ);

}  // namespace decomposer
