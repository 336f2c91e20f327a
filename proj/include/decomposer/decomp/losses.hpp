#pragma once

#include <span>
#include <vector>

#include "decomposer/decomp/decomposition.hpp"
#include "decomposer/imgcore/image.hpp"

namespace decomposer {

// Mean absolute error over all pixels and channels.
double loss_oi(const Image& pred, const Image& gt);

// Sum over views of the per-view mean absolute error between the view and
// its composition.
double loss_decomp(std::span<const Image> views, const Decomposition& d);

// weight * mean of all mask values over all views and pixels.
double mask_decay(std::span<const ScalarMask> masks, double weight);

// Mean over pixels of -[w_pos t log p + w_neg (1 - t) log(1 - p)], with p
// clamped to [1e-7, 1 - 1e-7].
double weighted_bce(const ScalarMask& pred, const BinaryMask& target, double w_pos, double w_neg);
double weighted_bce(std::span<const ScalarMask> pred, std::span<const BinaryMask> target,
                    double w_pos, double w_neg);

inline constexpr double kBceClamp = 1e-7;

// alpha_decomp * loss_decomp + alpha_oi * loss_oi + mask decay. A null
// gt_oi drops the OI term.
double total_loss(std::span<const Image> views, const Decomposition& d, const Image* gt_oi,
                  const LossWeights& w);

// Gradient of total_loss(views, squash(theta), gt_oi, w) with respect to
// theta. The subgradient of |r| at r = 0 is taken as 0.
ParamState grad_total_loss(std::span<const Image> views, const ParamState& theta,
                           const Image* gt_oi, const LossWeights& w, double* loss = nullptr);

// The composition objective over a flat parameter vector, with its scratch
// buffers kept between calls. `views` and `gt_oi` must outlive the object.
class CompositionObjective {
 public:
  CompositionObjective(std::span<const Image> views, const Image* gt_oi, const LossWeights& w);

  const ParamLayout& layout() const { return layout_; }
  const LossWeights& weights() const { return weights_; }

  // Loss at theta. When grad is non-empty it receives dL/dtheta.
  double evaluate(std::span<const double> theta, std::span<double> grad);

 private:
  std::span<const Image> views_;
  const Image* gt_oi_;
  LossWeights weights_;
  ParamLayout layout_;
  std::vector<double> squashed_;
};

// Shadow/light pre-fit: sum over views of MAE(oi * s + l, target). Reads
// the OI block of theta as a constant; gradient is non-zero only in the
// shadow and light blocks.
class SlFitObjective {
 public:
  SlFitObjective(std::span<const Image> targets, const ParamLayout& layout);

  double evaluate(std::span<const double> theta, std::span<double> grad);

 private:
  std::span<const Image> targets_;
  ParamLayout layout_;
  std::vector<double> oi_;
  std::vector<double> shadow_;
  std::vector<double> light_;
  std::vector<double> zeros_;
  std::vector<double> scratch_;
};

// Occlusion pre-fit: weighted BCE of squash(theta_mask) against binary
// targets, averaged over all views and pixels. Gradient only in mask blocks.
class MaskBceObjective {
 public:
  MaskBceObjective(std::span<const BinaryMask> targets, const ParamLayout& layout, double w_pos,
                   double w_neg);

  double evaluate(std::span<const double> theta, std::span<double> grad);

 private:
  std::span<const BinaryMask> targets_;
  ParamLayout layout_;
  double w_pos_;
  double w_neg_;
};

}  // namespace decomposer
