// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "decomposer/decomp/compose.hpp"
#include "decomposer/decomp/losses.hpp"
#include "decomposer/evalkit/evaluate.hpp"
#include "decomposer/evalkit/metrics.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/pipeline/commands.hpp"
#include "decomposer/pipeline/config.hpp"
#include "decomposer/pipeline/dataset.hpp"
#include "decomposer/synthgen/generator.hpp"
#include "oracles.hpp"

using namespace decomposer;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int hardware_jobs() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("decomposer_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::ostringstream quiet_log;

// 1. Analytic gradients against central differences.
Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const LossWeights w;  // every term active at its default weight
  const oracle::LossTerms terms{w.alpha_decomp, w.alpha_oi, w.mask_decay_weight};
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<Image> views;
    for (int i = 0; i < 2; ++i) views.push_back(oracle::random_image(seed * 100 + i, 8, 8, 3));
    const Image gt_oi = oracle::random_image(seed * 100 + 50, 8, 8, 3);
    ParamState theta;
    theta.layout = ParamLayout(2, 8, 8, 3);
    theta.values = oracle::random_vector(seed * 100 + 99, theta.layout.total(), -3.0, 3.0);
    const ParamState g = grad_total_loss(views, theta, &gt_oi, w);
    const oracle::GradCheck r = oracle::check_gradient(views, theta.values, &gt_oi, terms, g.values, 1e-5, 1e-6);
    worst = std::max(worst, r.max_rel);
    checked += r.checked;
    skipped += r.skipped;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 30.0,
          fmt("max rel err %.3g over %zu params (%zu near kinks skipped), %.1f s", worst, checked, skipped, secs)};
}

// 2. Stored ground truth recomposes every view exactly.
Outcome composition_closure() {
  const auto t0 = std::chrono::steady_clock::now();
  const synth::GeneratorConfig cfg;  // 128x128, 10 views
  double max_err = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Image origin = synth::procedural_origin(seed, cfg.height, cfg.width);
    const synth::SceneSample s = synth::generate_sequence(origin, seed * 1000, cfg);
    for (int i = 0; i < s.num_views(); ++i) {
      const Image re = clamp01(compose(s.origin, s.gt_shadow[i], s.gt_light[i], s.gt_occ_mask[i], s.gt_occ_content[i]));
      for (std::size_t k = 0; k < re.data().size(); ++k) {
        max_err = std::max(max_err, std::abs(re.data()[k] - s.views[i].data()[k]));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {max_err == 0.0 && secs < 60.0, fmt("max abs err %g over 1000 views, %.1f s", max_err, secs)};
}

// 3. Metric identities and closed forms.
Outcome metric_oracles() {
  std::vector<std::string> bad;
  const Image x = oracle::random_image(1, 64, 64, 3);
  if (eval::ssim(x, x) != 1.0) bad.push_back("ssim(x,x)");

  double worst_const = 0.0;
  for (auto [a, b] : {std::pair{0.2, 0.7}, {0.5, 0.5}, {0.0, 1.0}, {0.9, 0.3}}) {
    const Image ia(32, 32, 3, a), ib(32, 32, 3, b);
    const double c1 = 0.01 * 0.01;
    const double closed = (2 * a * b + c1) / (a * a + b * b + c1);
    worst_const = std::max(worst_const, std::abs(eval::ssim(ia, ib) - closed));
  }
  if (worst_const > 1e-9) bad.push_back("constant ssim");

  const Image n1 = oracle::random_image(11, 128, 128, 3), n2 = oracle::random_image(12, 128, 128, 3);
  const double expect = 255.0 * 255.0 / 6.0;
  const double noise_mse = eval::mse255(n1, n2);
  const double rel = std::abs(noise_mse - expect) / expect;
  if (rel > 0.02) bad.push_back("noise mse");

  const Image y = oracle::random_image(2, 64, 64, 3);
  const eval::MetricPair m = eval::masked_metrics(x, y, BinaryMask(64, 64));
  if (m.mse != eval::mse255(x, y) || m.ssim != eval::ssim(x, y)) bad.push_back("empty-mask metrics");

  std::string detail = fmt("constant ssim err %.2g, noise mse %.1f (%.2f%% off)", worst_const, noise_mse, rel * 100);
  for (const std::string& b : bad) detail += "; failed " + b;
  return {bad.empty(), detail};
}

// 6. All-ones masks on occlusion-free views are flagged.
Outcome degenerate_mask_guard() {
  synth::GeneratorConfig cfg;
  cfg.occluder_count = {0, 0};
  double min_fpr = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const synth::SceneSample s = synth::generate_sequence(synth::procedural_origin(seed, 128, 128), seed * 7, cfg);
    Decomposition d;
    d.oi = s.origin;
    for (int i = 0; i < s.num_views(); ++i) {
      d.shadow.push_back(s.gt_shadow[i]);
      d.light.push_back(s.gt_light[i]);
      d.occ_mask.emplace_back(128, 128, 1.0);
      d.occ_content.push_back(s.views[i]);  // the view compared to itself
    }
    const eval::SampleRecord r = eval::evaluate_sample(s, d);
    min_fpr = std::min(min_fpr, r.occ_fpr);
  }
  return {min_fpr == 1.0, fmt("min FPR %.6f over 5 samples", min_fpr)};
}

struct PipelineRun {
  pipeline::PipelineConfig cfg;
  nlohmann::json report;
  double seconds = 0.0;
  bool ok = false;
};

PipelineRun run_pipeline(const fs::path& root, int count) {
  PipelineRun run;
  run.cfg.dataset_root = root / "data";
  run.cfg.output_root = root / "out";
  run.cfg.jobs = hardware_jobs();
  const auto t0 = std::chrono::steady_clock::now();
  run.ok = pipeline::cmd_generate(run.cfg, count, quiet_log).exit_code() == 0 &&
           pipeline::cmd_pseudolabel(run.cfg, quiet_log).exit_code() == 0 &&
           pipeline::cmd_solve(run.cfg, quiet_log).exit_code() == 0 &&
           pipeline::cmd_eval(run.cfg, quiet_log).exit_code() == 0;
  run.seconds = seconds_since(t0);
  if (run.ok) run.report = nlohmann::json::parse(slurp(run.cfg.output_root / "report.json"));
  return run;
}

// 4. Default pipeline quality on 20 samples.
Outcome solver_recovery(const PipelineRun& run) {
  if (!run.ok) return {false, "pipeline failed"};
  const double ssim = run.report["mean"]["full_ssim"].get<double>();
  const double fpr = run.report["mean"]["occ_fpr"].get<double>();
  return {ssim >= 0.85 && fpr <= 0.05 && run.seconds < 7200.0,
          fmt("mean full SSIM %.4f, mean FPR %.4f, %.0f s", ssim, fpr, run.seconds)};
}

// 5. Staged curriculum against joint-only at equal step budget, both arms
// supervised by the ground-truth original.
Outcome curriculum_benefit(const PipelineRun& base) {
  if (!base.ok) return {false, "pipeline failed"};
  auto arm = [&](const char* stages, const char* name) {
    pipeline::PipelineConfig cfg = base.cfg;
    cfg.oi_supervision = pipeline::OiSupervision::ground_truth;
    cfg.solver.stages = opt::StageSet::parse(stages);
    cfg.output_root = base.cfg.output_root.parent_path() / name;
    fs::remove_all(cfg.output_root);
    const bool ok = pipeline::cmd_solve(cfg, quiet_log).exit_code() == 0;
    std::vector<double> losses;
    if (!ok) return losses;
    for (const std::string& id : pipeline::list_samples(cfg.dataset_root)) {
      const auto trace = nlohmann::json::parse(slurp(cfg.output_root / id / "trace.json"));
      losses.push_back(trace["final_loss"].get<double>());
    }
    return losses;
  };
  const std::vector<double> staged = arm("sl,occ,joint", "staged");
  const std::vector<double> joint = arm("joint", "joint_only");
  if (staged.size() != 20 || joint.size() != 20) return {false, "solve failed"};
  int wins = 0;
  double staged_mean = 0.0, joint_mean = 0.0;
  for (std::size_t i = 0; i < staged.size(); ++i) {
    wins += staged[i] < joint[i];
    staged_mean += staged[i] / 20.0;
    joint_mean += joint[i] / 20.0;
  }
  return {wins >= 15, fmt("staged wins %d/20 (mean loss %.5f vs %.5f)", wins, staged_mean, joint_mean)};
}

// 7. Solver OI against the random-pairing baseline.
Outcome ordering_vs_baseline(const PipelineRun& run) {
  if (!run.ok) return {false, "pipeline failed"};
  const double oi = run.report["mean"]["oi_ssim"].get<double>();
  const double base = run.report["random_baseline"]["rand_ssim"].get<double>();
  return {oi - base >= 0.3, fmt("OI SSIM %.4f vs baseline %.4f (margin %.4f)", oi, base, oi - base)};
}

// 8. A second end-to-end run reproduces report.json byte for byte.
Outcome determinism(const PipelineRun& first) {
  if (!first.ok) return {false, "pipeline failed"};
  const PipelineRun second = run_pipeline(fresh_dir("rerun"), 20);
  if (!second.ok) return {false, "rerun failed"};
  const std::string a = slurp(first.cfg.output_root / "report.json");
  const std::string b = slurp(second.cfg.output_root / "report.json");
  return {a == b, fmt("report.json %zu bytes, %s", a.size(), a == b ? "identical" : "differs")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient correctness", guarded(gradient_correctness));
  report(2, "composition closure", guarded(composition_closure));
  report(3, "metric oracles", guarded(metric_oracles));

  PipelineRun run;
  try {
    run = run_pipeline(fresh_dir("main"), 20);
  } catch (const std::exception& e) {
    std::printf("pipeline error: %s\n", e.what());
  }
  report(4, "solver recovery", guarded([&] { return solver_recovery(run); }));
  report(5, "curriculum benefit", guarded([&] { return curriculum_benefit(run); }));
  report(6, "degenerate-mask guard", guarded(degenerate_mask_guard));
  report(7, "ordering vs baseline", guarded([&] { return ordering_vs_baseline(run); }));
  report(8, "determinism", guarded([&] { return determinism(run); }));
  return failures == 0 ? 0 : 1;
}
