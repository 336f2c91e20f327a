#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decomposer/decomp/decomposition.hpp"
#include "decomposer/decomp/losses.hpp"
#include "decomposer/pseudolabel/pseudolabel.hpp"
#include "decomposer/solver/adam.hpp"

namespace decomposer::opt {

enum class Stage { sl, occ, joint };

std::string_view stage_name(Stage s);

// Subset of the curriculum to run; order is always sl, occ, joint.
struct StageSet {
  bool sl = true;
  bool occ = true;
  bool joint = true;

  // Comma separated subset of "sl,occ,joint". Throws ArgumentError on
  // unknown names or an empty list.
  static StageSet parse(std::string_view text);
  std::string str() const;
  bool all() const { return sl && occ && joint; }
  bool operator==(const StageSet&) const = default;
};

struct SolverConfig {
  int sl_steps = 300;
  int occ_steps = 200;
  int joint_steps = 600;
  AdamConfig adam;
  LossWeights loss_weights;
  double convergence_tol = 1e-6;
  int convergence_window = 20;
  StageSet stages;

  int total_steps() const { return sl_steps + occ_steps + joint_steps; }
  void validate() const;
};

enum class Termination { steps_exhausted, converged };

std::string_view termination_name(Termination t);

struct StageTrace {
  Stage stage = Stage::joint;
  std::vector<double> losses;  // loss before each update, plus the final state
  std::vector<double> best;    // best-so-far after each entry of `losses`
  int steps = 0;               // updates actually applied
  Termination termination = Termination::steps_exhausted;
};

struct SolveTrace {
  std::vector<StageTrace> stages;
  std::vector<std::string> warnings;
  double final_loss = 0.0;  // composition objective at the returned state
  double wall_seconds = 0.0;
};

struct SolveResult {
  Decomposition decomposition;
  ParamState theta;
  SolveTrace trace;
};

// Per-pixel, per-channel median across views (mean of the middle pair for
// an even count).
Image median_image(std::span<const Image> views);

// theta_oi from the median view (or gt_oi when given), shadow/light from the
// pseudo masks, mask from 0.9 on pseudo positives and 0.1 elsewhere, occ
// from the view pixels. Logit inputs are clamped to [1e-4, 1 - 1e-4].
ParamState init_state(std::span<const Image> views, const pseudo::PseudoLabels& labels,
                      const Image* gt_oi = nullptr);

// Variant used when pretraining stages are skipped: shadow/light logits are
// seeded from the pseudo masks only if `seed_sl`, mask logits only if
// `seed_mask`; unseeded logits start at 0 (squashed value 0.5). `labels`
// may be empty when neither flag is set.
ParamState init_state(std::span<const Image> views, const pseudo::PseudoLabels& labels,
                      const Image* gt_oi, bool seed_sl, bool seed_mask);

// Each stage runs at most `steps` updates on its own parameter subset with
// fresh optimizer moments, then restores the best-scoring state it visited.
// Throws DivergenceError on a non-finite loss.
StageTrace stage_sl(ParamState& theta, const pseudo::PseudoLabels& labels, const SolverConfig& cfg);
StageTrace stage_occ(ParamState& theta, const pseudo::PseudoLabels& labels, const SolverConfig& cfg,
                     std::vector<std::string>* warnings = nullptr);
StageTrace stage_joint(ParamState& theta, std::span<const Image> views, const Image* gt_oi,
                       const SolverConfig& cfg);

// Inverse class frequency n_total / (2 n_c) over all pseudo masks; {1, 1}
// with a warning when one class is absent.
struct ClassWeights {
  double pos = 1.0;
  double neg = 1.0;
  bool degenerate = false;
};
ClassWeights inverse_frequency_weights(std::span<const BinaryMask> masks);

// init -> stage_sl -> stage_occ -> stage_joint, skipping stages not in
// cfg.stages. A skipped pretraining stage also skips the pseudo-label
// seeding of the parameters it would have fitted, and its step budget is
// added to the joint stage so ablations run the same number of updates.
SolveResult solve(std::span<const Image> views, const pseudo::PseudoLabels& labels,
                  const SolverConfig& cfg, const Image* gt_oi = nullptr);

}  // namespace decomposer::opt
