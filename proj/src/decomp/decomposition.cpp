#include "decomposer/decomp/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "decomposer/errors.hpp"
#include "decomposer/simd/kernels.hpp"

namespace decomposer {

void Decomposition::validate() const {
  const std::size_t n = shadow.size();
  if (n == 0) throw DimensionError("Decomposition: at least one view required");
  if (light.size() != n || occ_mask.size() != n || occ_content.size() != n) {
    throw DimensionError("Decomposition: per-view lists differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    require_same_extent(oi, shadow[i], "Decomposition shadow");
    require_same_extent(oi, light[i], "Decomposition light");
    require_same_extent(oi, occ_mask[i], "Decomposition occlusion mask");
    require_same_shape(oi, occ_content[i], "Decomposition occlusion content");
  }
}

void LossWeights::validate() const {
  if (alpha_decomp < 0.0 || alpha_oi < 0.0 || mask_decay_weight < 0.0) {
    throw ArgumentError("LossWeights: alphas and mask decay weight must be non-negative");
  }
  if (!(bce_pos_weight > 0.0) || !(bce_neg_weight > 0.0)) {
    throw ArgumentError("LossWeights: BCE class weights must be positive");
  }
}

ParamLayout::ParamLayout(int views, int height, int width, int channels)
    : views_(views), height_(height), width_(width), channels_(channels) {
  if (views < 1 || height < 1 || width < 1 || (channels != 1 && channels != 3)) {
    throw ArgumentError("ParamLayout: invalid dimensions");
  }
}

std::vector<Block> ParamLayout::blocks(ParamGroup group) const {
  if (group == ParamGroup::oi) return {oi()};
  std::vector<Block> out;
  out.reserve(views_);
  for (int i = 0; i < views_; ++i) {
    switch (group) {
      case ParamGroup::shadow:
        out.push_back(shadow(i));
        break;
      case ParamGroup::light:
        out.push_back(light(i));
        break;
      case ParamGroup::mask:
        out.push_back(mask(i));
        break;
      case ParamGroup::occ:
        out.push_back(occ(i));
        break;
      case ParamGroup::oi:
        break;
    }
  }
  return out;
}

double logistic(double theta) { return 1.0 / (1.0 + std::exp(-theta)); }

double logit(double x, double eps) {
  const double c = std::min(1.0 - eps, std::max(eps, x));
  return std::log(c / (1.0 - c));
}

namespace {

void write_logits(std::span<double> dst, std::span<const double> src, double eps) {
  std::transform(src.begin(), src.end(), dst.begin(), [eps](double v) { return logit(v, eps); });
}

}  // namespace

ParamState to_params(const Decomposition& d, double eps) {
  d.validate();
  ParamState theta{ParamLayout(d.views(), d.oi.height(), d.oi.width(), d.oi.channels()), {}};
  theta.values.resize(theta.layout.total());
  write_logits(theta.block(theta.layout.oi()), d.oi.data(), eps);
  for (int i = 0; i < d.views(); ++i) {
    write_logits(theta.block(theta.layout.shadow(i)), d.shadow[i].data(), eps);
    write_logits(theta.block(theta.layout.light(i)), d.light[i].data(), eps);
    write_logits(theta.block(theta.layout.mask(i)), d.occ_mask[i].data(), eps);
    write_logits(theta.block(theta.layout.occ(i)), d.occ_content[i].data(), eps);
  }
  return theta;
}

Decomposition squash(const ParamState& theta) {
  const ParamLayout& L = theta.layout;
  std::vector<double> x(L.total());
  simd::kernels().sigmoid(theta.values.data(), x.data(), x.size());
  auto slice = [&](Block b) {
    return std::vector<double>(x.begin() + b.offset, x.begin() + b.offset + b.length);
  };

  Decomposition d;
  d.oi = Image::unclamped(L.height(), L.width(), L.channels(), slice(L.oi()));
  for (int i = 0; i < L.views(); ++i) {
    d.shadow.push_back(ScalarMask::unclamped(L.height(), L.width(), slice(L.shadow(i))));
    d.light.push_back(ScalarMask::unclamped(L.height(), L.width(), slice(L.light(i))));
    d.occ_mask.push_back(ScalarMask::unclamped(L.height(), L.width(), slice(L.mask(i))));
    d.occ_content.push_back(Image::unclamped(L.height(), L.width(), L.channels(), slice(L.occ(i))));
  }
  return d;
}

}  // namespace decomposer
