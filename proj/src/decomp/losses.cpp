#include "decomposer/decomp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "decomposer/decomp/compose.hpp"
#include "decomposer/errors.hpp"
#include "decomposer/simd/kernels.hpp"

namespace decomposer {
namespace {

void require_views(std::span<const Image> views, const ParamLayout& layout, std::string_view what) {
  if (views.size() != static_cast<std::size_t>(layout.views())) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(layout.views()) +
                         " views, got " + std::to_string(views.size()));
  }
  for (const Image& v : views) {
    if (v.height() != layout.height() || v.width() != layout.width() ||
        v.channels() != layout.channels()) {
      throw DimensionError(std::string(what) + ": view shape differs from the decomposition");
    }
  }
}

void require_theta(std::span<const double> theta, std::span<double> grad, const ParamLayout& layout) {
  if (theta.size() != layout.total() || (!grad.empty() && grad.size() != layout.total())) {
    throw DimensionError("objective: parameter vector length does not match layout");
  }
}

double bce_term(double p, std::uint8_t t, double w_pos, double w_neg) {
  const double q = std::min(1.0 - kBceClamp, std::max(kBceClamp, p));
  return t ? -w_pos * std::log(q) : -w_neg * std::log(1.0 - q);
}

}  // namespace

double loss_oi(const Image& pred, const Image& gt) {
  require_same_shape(pred, gt, "loss_oi");
  return simd::kernels().sum_abs_diff(pred.data().data(), gt.data().data(), pred.size()) /
         double(pred.size());
}

double loss_decomp(std::span<const Image> views, const Decomposition& d) {
  d.validate();
  if (views.size() != d.shadow.size()) throw DimensionError("loss_decomp: view count mismatch");
  const auto& k = simd::kernels();
  double total = 0.0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    require_same_shape(views[i], d.oi, "loss_decomp");
    const Image y = compose(d.oi, d.shadow[i], d.light[i], d.occ_mask[i], d.occ_content[i]);
    total += k.sum_abs_diff(views[i].data().data(), y.data().data(), y.size()) / double(y.size());
  }
  return total;
}

double mask_decay(std::span<const ScalarMask> masks, double weight) {
  if (weight < 0.0) throw ArgumentError("mask_decay: weight must be non-negative");
  if (masks.empty() || weight == 0.0) return 0.0;
  const auto& k = simd::kernels();
  double total = 0.0;
  std::size_t count = 0;
  for (const ScalarMask& m : masks) {
    total += k.sum(m.data().data(), m.pixels());
    count += m.pixels();
  }
  return weight * (total / double(count));
}

double weighted_bce(const ScalarMask& pred, const BinaryMask& target, double w_pos, double w_neg) {
  return weighted_bce(std::span(&pred, 1), std::span(&target, 1), w_pos, w_neg);
}

double weighted_bce(std::span<const ScalarMask> pred, std::span<const BinaryMask> target,
                    double w_pos, double w_neg) {
  if (pred.size() != target.size()) throw DimensionError("weighted_bce: list length mismatch");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require_same_extent(pred[i], target[i], "weighted_bce");
    const auto p = pred[i].data();
    const auto t = target[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) total += bce_term(p[j], t[j], w_pos, w_neg);
    count += p.size();
  }
  return count == 0 ? 0.0 : total / double(count);
}

double total_loss(std::span<const Image> views, const Decomposition& d, const Image* gt_oi,
                  const LossWeights& w) {
  w.validate();
  double loss = 0.0;
  if (w.alpha_decomp > 0.0) loss += w.alpha_decomp * loss_decomp(views, d);
  if (gt_oi != nullptr && w.alpha_oi > 0.0) loss += w.alpha_oi * loss_oi(d.oi, *gt_oi);
  loss += mask_decay(d.occ_mask, w.mask_decay_weight);
  return loss;
}

ParamState grad_total_loss(std::span<const Image> views, const ParamState& theta,
                           const Image* gt_oi, const LossWeights& w, double* loss) {
  CompositionObjective objective(views, gt_oi, w);
  if (!(objective.layout() == theta.layout)) {
    throw DimensionError("grad_total_loss: parameter layout does not match views");
  }
  ParamState grad{theta.layout, std::vector<double>(theta.values.size())};
  const double value = objective.evaluate(theta.values, grad.values);
  if (loss != nullptr) *loss = value;
  return grad;
}

CompositionObjective::CompositionObjective(std::span<const Image> views, const Image* gt_oi,
                                           const LossWeights& w)
    : views_(views), gt_oi_(gt_oi), weights_(w) {
  w.validate();
  if (views.empty()) throw DimensionError("CompositionObjective: no views");
  layout_ = ParamLayout(static_cast<int>(views.size()), views[0].height(), views[0].width(),
                        views[0].channels());
  require_views(views, layout_, "CompositionObjective");
  if (gt_oi != nullptr) require_same_shape(*gt_oi, views[0], "CompositionObjective gt_oi");
  squashed_.resize(layout_.total());
}

double CompositionObjective::evaluate(std::span<const double> theta, std::span<double> grad) {
  require_theta(theta, grad, layout_);
  const auto& k = simd::kernels();
  std::vector<double> local;
  if (grad.empty()) {
    local.resize(layout_.total());
    grad = local;
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  k.sigmoid(theta.data(), squashed_.data(), squashed_.size());

  const std::size_t P = layout_.pixels();
  const int C = layout_.channels();
  const int N = layout_.views();
  const double* x = squashed_.data();
  double* g = grad.data();
  const Block oi = layout_.oi();
  double loss = 0.0;

  if (weights_.alpha_decomp > 0.0) {
    const double coef = weights_.alpha_decomp / double(P * C);
    for (int i = 0; i < N; ++i) {
      const Block s = layout_.shadow(i);
      const Block l = layout_.light(i);
      const Block m = layout_.mask(i);
      const Block occ = layout_.occ(i);
      double abs_sum = 0.0;
      for (int c = 0; c < C; ++c) {
        simd::ResidualArgs args;
        args.view = views_[i].plane(c).data();
        args.oi = x + oi.offset + c * P;
        args.shadow = x + s.offset;
        args.light = x + l.offset;
        args.mask = x + m.offset;
        args.occ = x + occ.offset + c * P;
        args.coef = coef;
        args.g_oi = g + oi.offset + c * P;
        args.g_shadow = g + s.offset;
        args.g_light = g + l.offset;
        args.g_mask = g + m.offset;
        args.g_occ = g + occ.offset + c * P;
        args.n = P;
        abs_sum += k.residual_grad(args);
      }
      loss += coef * abs_sum;
    }
  }

  if (gt_oi_ != nullptr && weights_.alpha_oi > 0.0) {
    const double coef = weights_.alpha_oi / double(P * C);
    const double* gt = gt_oi_->data().data();
    loss += coef * k.sum_abs_diff(x + oi.offset, gt, oi.length);
    for (std::size_t j = 0; j < oi.length; ++j) {
      const double r = x[oi.offset + j] - gt[j];
      g[oi.offset + j] += r > 0.0 ? coef : (r < 0.0 ? -coef : 0.0);
    }
  }

  if (weights_.mask_decay_weight > 0.0) {
    const double coef = weights_.mask_decay_weight / double(N * P);
    double mask_sum = 0.0;
    for (int i = 0; i < N; ++i) {
      const Block m = layout_.mask(i);
      mask_sum += k.sum(x + m.offset, m.length);
      for (std::size_t j = 0; j < m.length; ++j) g[m.offset + j] += coef;
    }
    loss += coef * mask_sum;
  }

  k.scale_by_sigmoid_slope(g, x, layout_.total());
  return loss;
}

SlFitObjective::SlFitObjective(std::span<const Image> targets, const ParamLayout& layout)
    : targets_(targets), layout_(layout) {
  require_views(targets, layout, "SlFitObjective");
  const std::size_t P = layout.pixels();
  oi_.resize(layout.oi().length);
  shadow_.resize(P);
  light_.resize(P);
  zeros_.assign(layout.channels() * P, 0.0);
  scratch_.resize(2 * layout.channels() * P + P);
}

double SlFitObjective::evaluate(std::span<const double> theta, std::span<double> grad) {
  require_theta(theta, grad, layout_);
  const auto& k = simd::kernels();
  const std::size_t P = layout_.pixels();
  const int C = layout_.channels();
  const double coef = 1.0 / double(P * C);
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> g_shadow(P);
  std::vector<double> g_light(P);

  k.sigmoid(theta.data() + layout_.oi().offset, oi_.data(), oi_.size());
  double loss = 0.0;
  for (int i = 0; i < layout_.views(); ++i) {
    const Block s = layout_.shadow(i);
    const Block l = layout_.light(i);
    k.sigmoid(theta.data() + s.offset, shadow_.data(), P);
    k.sigmoid(theta.data() + l.offset, light_.data(), P);
    std::fill(g_shadow.begin(), g_shadow.end(), 0.0);
    std::fill(g_light.begin(), g_light.end(), 0.0);
    double* g_oi = scratch_.data();
    double* g_occ = g_oi + C * P;
    double* g_mask = g_occ + C * P;
    for (int c = 0; c < C; ++c) {
      simd::ResidualArgs args;
      args.view = targets_[i].plane(c).data();
      args.oi = oi_.data() + c * P;
      args.shadow = shadow_.data();
      args.light = light_.data();
      args.mask = zeros_.data();
      args.occ = zeros_.data() + c * P;
      args.coef = coef;
      args.g_oi = g_oi + c * P;
      args.g_shadow = g_shadow.data();
      args.g_light = g_light.data();
      args.g_mask = g_mask;
      args.g_occ = g_occ + c * P;
      args.n = P;
      loss += coef * k.residual_grad(args);
    }
    if (!grad.empty()) {
      k.scale_by_sigmoid_slope(g_shadow.data(), shadow_.data(), P);
      k.scale_by_sigmoid_slope(g_light.data(), light_.data(), P);
      std::copy(g_shadow.begin(), g_shadow.end(), grad.begin() + s.offset);
      std::copy(g_light.begin(), g_light.end(), grad.begin() + l.offset);
    }
  }
  return loss;
}

MaskBceObjective::MaskBceObjective(std::span<const BinaryMask> targets, const ParamLayout& layout,
                                   double w_pos, double w_neg)
    : targets_(targets), layout_(layout), w_pos_(w_pos), w_neg_(w_neg) {
  if (targets.size() != static_cast<std::size_t>(layout.views())) {
    throw DimensionError("MaskBceObjective: target count does not match views");
  }
  for (const BinaryMask& t : targets) {
    if (t.height() != layout.height() || t.width() != layout.width()) {
      throw DimensionError("MaskBceObjective: target extent mismatch");
    }
  }
  if (!(w_pos > 0.0) || !(w_neg > 0.0)) throw ArgumentError("MaskBceObjective: weights must be positive");
}

double MaskBceObjective::evaluate(std::span<const double> theta, std::span<double> grad) {
  require_theta(theta, grad, layout_);
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t P = layout_.pixels();
  const double inv_count = 1.0 / double(P * layout_.views());
  std::vector<double> p(P);
  double loss = 0.0;
  for (int i = 0; i < layout_.views(); ++i) {
    const Block m = layout_.mask(i);
    simd::kernels().sigmoid(theta.data() + m.offset, p.data(), P);
    const auto t = targets_[i].data();
    for (std::size_t j = 0; j < P; ++j) {
      loss += bce_term(p[j], t[j], w_pos_, w_neg_);
      if (!grad.empty() && p[j] > kBceClamp && p[j] < 1.0 - kBceClamp) {
        // d/dtheta of the unclamped term; the clamp has zero slope outside.
        const double d = t[j] ? -w_pos_ * (1.0 - p[j]) : w_neg_ * p[j];
        grad[m.offset + j] = d * inv_count;
      }
    }
  }
  return loss * inv_count;
}

}  // namespace decomposer
