#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "decomposer/imgcore/image.hpp"

namespace decomposer {

// Recovered components of one sequence: a shared original image and, per
// view, shadow/light/occlusion masks plus occluder content. Occlusion masks
// are soft in [0, 1]; they are binarized at 0.5 only for export and metrics.
struct Decomposition {
  Image oi;
  std::vector<ScalarMask> shadow;
  std::vector<ScalarMask> light;
  std::vector<ScalarMask> occ_mask;
  std::vector<Image> occ_content;

  int views() const { return static_cast<int>(shadow.size()); }

  // Throws DimensionError unless every raster shares oi's extent, content
  // images share its channel count and all per-view lists have equal length >= 1.
  void validate() const;
};

struct LossWeights {
  double alpha_decomp = 1.0;
  double alpha_oi = 1.0;
  double mask_decay_weight = 0.5;
  double bce_pos_weight = 1.0;
  double bce_neg_weight = 1.0;

  void validate() const;
};

enum class ParamGroup { oi, shadow, light, mask, occ };

struct Block {
  std::size_t offset = 0;
  std::size_t length = 0;
};

// Offsets of each decomposition variable inside one flat parameter vector:
// [oi (C planes)] then per view [shadow][light][mask][occ (C planes)].
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(int views, int height, int width, int channels);

  int views() const { return views_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t total() const { return oi().length + views_ * per_view(); }

  Block oi() const { return {0, channels_ * pixels()}; }
  Block shadow(int view) const { return {view_base(view), pixels()}; }
  Block light(int view) const { return {view_base(view) + pixels(), pixels()}; }
  Block mask(int view) const { return {view_base(view) + 2 * pixels(), pixels()}; }
  Block occ(int view) const { return {view_base(view) + 3 * pixels(), channels_ * pixels()}; }

  // All blocks of a group, in view order (one block for oi).
  std::vector<Block> blocks(ParamGroup group) const;

  bool operator==(const ParamLayout&) const = default;

 private:
  std::size_t per_view() const { return (3 + channels_) * pixels(); }
  std::size_t view_base(int view) const { return oi().length + view * per_view(); }

  int views_ = 0;
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
};

// Unconstrained optimization variables; the decomposition is obtained
// elementwise through the logistic squash 1 / (1 + exp(-theta)).
struct ParamState {
  ParamLayout layout;
  std::vector<double> values;

  std::span<double> block(Block b) { return {values.data() + b.offset, b.length}; }
  std::span<const double> block(Block b) const { return {values.data() + b.offset, b.length}; }
};

double logistic(double theta);

// log(x / (1 - x)) with x first clamped to [eps, 1 - eps].
double logit(double x, double eps = 1e-4);

ParamState to_params(const Decomposition& d, double eps = 1e-4);
Decomposition squash(const ParamState& theta);

}  // namespace decomposer
