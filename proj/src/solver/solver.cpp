#include "decomposer/solver/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "decomposer/errors.hpp"

namespace decomposer::opt {
namespace {

constexpr double kLogitEps = 1e-4;

void fill_logits(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = logit(src[i], kLogitEps);
}

template <typename Objective>
StageTrace run_stage(Stage stage, ParamState& theta, Objective& objective, int steps,
                     const std::vector<Block>& active, const SolverConfig& cfg) {
  StageTrace trace;
  trace.stage = stage;
  trace.losses.reserve(static_cast<std::size_t>(steps) + 1);
  trace.best.reserve(static_cast<std::size_t>(steps) + 1);

  std::vector<double> grad(theta.values.size(), 0.0);
  std::vector<double> best_values(theta.values);
  double best = 0.0;
  AdamState state(theta.values.size());

  for (int t = 0;; ++t) {
    const double loss = objective.evaluate(theta.values, grad);
    if (!std::isfinite(loss)) {
      throw DivergenceError(std::string("stage ") + std::string(stage_name(stage)) +
                            ": non-finite loss at step " + std::to_string(t));
    }
    if (t == 0 || loss < best) {
      best = loss;
      for (const Block& b : active) {
        std::copy_n(theta.values.begin() + b.offset, b.length, best_values.begin() + b.offset);
      }
    }
    trace.losses.push_back(loss);
    trace.best.push_back(best);
    if (t == steps) break;

    const int w = cfg.convergence_window;
    if (t >= w) {
      const double past = trace.losses[static_cast<std::size_t>(t - w)];
      const double rel = std::abs(past - loss) / std::max(std::abs(past), 1e-300);
      if (rel < cfg.convergence_tol) {
        trace.termination = Termination::converged;
        break;
      }
    }
    optimizer_step(theta.values, grad, state, cfg.adam, active);
    trace.steps = t + 1;
  }

  for (const Block& b : active) {
    std::copy_n(best_values.begin() + b.offset, b.length, theta.values.begin() + b.offset);
  }
  return trace;
}

std::vector<Block> concat(std::vector<Block> a, const std::vector<Block>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void require_labels(std::span<const Image> views, const pseudo::PseudoLabels& labels) {
  const std::size_t n = views.size();
  if (labels.shadow.size() != n || labels.light.size() != n || labels.occ_mask.size() != n ||
      labels.sl_target.size() != n) {
    throw ArgumentError("pseudo-labels missing: expected one set per view (" + std::to_string(n) +
                        ")");
  }
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::sl: return "sl";
    case Stage::occ: return "occ";
    case Stage::joint: return "joint";
  }
  return "?";
}

std::string_view termination_name(Termination t) {
  return t == Termination::converged ? "converged" : "steps-exhausted";
}

StageSet StageSet::parse(std::string_view text) {
  StageSet set{false, false, false};
  bool any = false;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "sl") {
      set.sl = true;
    } else if (item == "occ") {
      set.occ = true;
    } else if (item == "joint") {
      set.joint = true;
    } else {
      throw ArgumentError("unknown stage '" + std::string(item) + "' (expected sl, occ, joint)");
    }
    any = true;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (!any) throw ArgumentError("stage list is empty");
  return set;
}

std::string StageSet::str() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(sl, "sl");
  add(occ, "occ");
  add(joint, "joint");
  return out;
}

void SolverConfig::validate() const {
  if (sl_steps <= 0 || occ_steps <= 0 || joint_steps <= 0) {
    throw ArgumentError("stage step counts must be positive");
  }
  adam.validate();
  loss_weights.validate();
  if (!(convergence_tol >= 0.0)) throw ArgumentError("convergence_tol must be >= 0");
  if (convergence_window <= 0) throw ArgumentError("convergence_window must be positive");
  if (!stages.sl && !stages.occ && !stages.joint) throw ArgumentError("no stages selected");
}

Image median_image(std::span<const Image> views) {
  if (views.empty()) throw DimensionError("median_image: no views");
  for (const Image& v : views) require_same_shape(v, views[0], "median_image");
  const std::size_t n = views.size();
  std::vector<double> out(views[0].size());
  std::vector<double> column(n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = views[i].data()[j];
    std::sort(column.begin(), column.end());
    out[j] = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return Image::from_values(views[0].height(), views[0].width(), views[0].channels(),
                            std::move(out));
}

ParamState init_state(std::span<const Image> views, const pseudo::PseudoLabels& labels,
                      const Image* gt_oi) {
  return init_state(views, labels, gt_oi, true, true);
}

ParamState init_state(std::span<const Image> views, const pseudo::PseudoLabels& labels,
                      const Image* gt_oi, bool seed_sl, bool seed_mask) {
  if (views.empty()) throw DimensionError("init_state: no views");
  if (seed_sl || seed_mask) require_labels(views, labels);
  const Image& v0 = views[0];
  ParamState theta{ParamLayout(static_cast<int>(views.size()), v0.height(), v0.width(),
                               v0.channels()),
                   {}};
  theta.values.assign(theta.layout.total(), 0.0);

  if (gt_oi != nullptr) {
    require_same_shape(*gt_oi, v0, "init_state gt_oi");
    fill_logits(theta.block(theta.layout.oi()), gt_oi->data());
  } else {
    fill_logits(theta.block(theta.layout.oi()), median_image(views).data());
  }

  const double hi = logit(0.9, kLogitEps);
  const double lo = logit(0.1, kLogitEps);
  for (int i = 0; i < theta.layout.views(); ++i) {
    require_same_shape(views[i], v0, "init_state");
    if (seed_sl) {
      require_same_extent(labels.shadow[i], v0, "init_state shadow");
      require_same_extent(labels.light[i], v0, "init_state light");
      fill_logits(theta.block(theta.layout.shadow(i)), labels.shadow[i].data());
      fill_logits(theta.block(theta.layout.light(i)), labels.light[i].data());
    }
    if (seed_mask) {
      require_same_extent(labels.occ_mask[i], v0, "init_state occ_mask");
      auto m = theta.block(theta.layout.mask(i));
      const auto t = labels.occ_mask[i].data();
      for (std::size_t j = 0; j < m.size(); ++j) m[j] = t[j] ? hi : lo;
    }
    fill_logits(theta.block(theta.layout.occ(i)), views[i].data());
  }
  return theta;
}

ClassWeights inverse_frequency_weights(std::span<const BinaryMask> masks) {
  std::size_t total = 0;
  std::size_t pos = 0;
  for (const BinaryMask& m : masks) {
    total += m.pixels();
    pos += m.count();
  }
  const std::size_t neg = total - pos;
  if (pos == 0 || neg == 0) return {1.0, 1.0, true};
  return {double(total) / (2.0 * double(pos)), double(total) / (2.0 * double(neg)), false};
}

StageTrace stage_sl(ParamState& theta, const pseudo::PseudoLabels& labels, const SolverConfig& cfg) {
  cfg.validate();
  require_labels(labels.sl_target, labels);
  SlFitObjective objective(labels.sl_target, theta.layout);
  const auto active = concat(theta.layout.blocks(ParamGroup::shadow),
                             theta.layout.blocks(ParamGroup::light));
  return run_stage(Stage::sl, theta, objective, cfg.sl_steps, active, cfg);
}

StageTrace stage_occ(ParamState& theta, const pseudo::PseudoLabels& labels, const SolverConfig& cfg,
                     std::vector<std::string>* warnings) {
  cfg.validate();
  require_labels(labels.sl_target, labels);
  const ClassWeights w = inverse_frequency_weights(labels.occ_mask);
  if (w.degenerate && warnings != nullptr) {
    warnings->push_back("occ stage: pseudo masks contain a single class; using weights 1/1");
  }
  MaskBceObjective objective(labels.occ_mask, theta.layout, w.pos, w.neg);
  return run_stage(Stage::occ, theta, objective, cfg.occ_steps,
                   theta.layout.blocks(ParamGroup::mask), cfg);
}

StageTrace stage_joint(ParamState& theta, std::span<const Image> views, const Image* gt_oi,
                       const SolverConfig& cfg) {
  cfg.validate();
  CompositionObjective objective(views, gt_oi, cfg.loss_weights);
  if (!(objective.layout() == theta.layout)) {
    throw DimensionError("stage_joint: parameter layout does not match views");
  }
  const std::vector<Block> all{{0, theta.layout.total()}};
  return run_stage(Stage::joint, theta, objective, cfg.joint_steps, all, cfg);
}

SolveResult solve(std::span<const Image> views, const pseudo::PseudoLabels& labels,
                  const SolverConfig& cfg, const Image* gt_oi) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  result.theta = init_state(views, labels, gt_oi, cfg.stages.sl, cfg.stages.occ);

  // A stage that is skipped donates its step budget to the joint stage so
  // ablations compare equal total work.
  SolverConfig joint_cfg = cfg;
  if (!cfg.stages.sl) joint_cfg.joint_steps += cfg.sl_steps;
  if (!cfg.stages.occ) joint_cfg.joint_steps += cfg.occ_steps;

  if (cfg.stages.sl) result.trace.stages.push_back(stage_sl(result.theta, labels, cfg));
  if (cfg.stages.occ) {
    result.trace.stages.push_back(stage_occ(result.theta, labels, cfg, &result.trace.warnings));
  }
  if (cfg.stages.joint) {
    result.trace.stages.push_back(stage_joint(result.theta, views, gt_oi, joint_cfg));
  }

  CompositionObjective objective(views, gt_oi, cfg.loss_weights);
  result.trace.final_loss = objective.evaluate(result.theta.values, {});
  result.decomposition = squash(result.theta);
  result.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace decomposer::opt
