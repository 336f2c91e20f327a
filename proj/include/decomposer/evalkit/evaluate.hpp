#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decomposer/decomp/decomposition.hpp"
#include "decomposer/evalkit/metrics.hpp"
#include "decomposer/synthgen/generator.hpp"

namespace decomposer::eval {

inline constexpr double kMaskThreshold = 0.5;

struct SampleRecord {
  std::string sample_id;
  double oi_mse = 0.0;
  double oi_ssim = 0.0;
  double sl_mse_masked = 0.0;   // mean over views, gt occlusions excluded
  double sl_ssim_masked = 0.0;
  double full_mse = 0.0;        // mean over views
  double full_ssim = 0.0;
  double occ_fpr = 0.0;         // pooled over all views of the sample
  double occ_iou = 0.0;         // pooled over all views of the sample
};

// Occlusion masks of `d` binarized at 0.5 (strictly greater is positive).
std::vector<BinaryMask> binarize_masks(const Decomposition& d);

// Full reconstruction of view i with the binarized mask, clamped to [0, 1].
Image reconstruct_view(const Decomposition& d, int view);

// Scores one decomposition against the sample's origin, views and
// ground-truth occlusion masks.
SampleRecord evaluate_sample(const synth::SceneSample& sample, const Decomposition& result);

struct BaselineMetrics {
  double rand_mse = 0.0;
  double rand_ssim = 0.0;
};

// Pairs each origin with a uniformly drawn different origin and averages
// mse255 and ssim. Throws ArgumentError for fewer than two origins.
BaselineMetrics random_baseline(std::span<const Image> origins, std::uint64_t seed);

struct ReportHeader {
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct EvalReport {
  ReportHeader header;
  std::vector<SampleRecord> records;
  SampleRecord mean;  // arithmetic means of `records`, sample_id "mean"
  std::optional<BaselineMetrics> baseline;
  std::vector<std::string> failures;  // "<sample_id>: <reason>"

  void recompute_mean();
};

// Deterministic serializations; neither contains timing data.
std::string report_json(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace decomposer::eval
