#include "decomposer/evalkit/evaluate.hpp"

#include <cstdio>

#include <json.hpp>

#include "decomposer/decomp/compose.hpp"
#include "decomposer/errors.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/synthgen/philox.hpp"

namespace decomposer::eval {
namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kBaselineStream = 11;

ordered_json record_json(const SampleRecord& r) {
  ordered_json j;
  j["sample_id"] = r.sample_id;
  j["oi_mse"] = r.oi_mse;
  j["oi_ssim"] = r.oi_ssim;
  j["sl_mse_masked"] = r.sl_mse_masked;
  j["sl_ssim_masked"] = r.sl_ssim_masked;
  j["full_mse"] = r.full_mse;
  j["full_ssim"] = r.full_ssim;
  j["occ_fpr"] = r.occ_fpr;
  j["occ_iou"] = r.occ_iou;
  return j;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<BinaryMask> binarize_masks(const Decomposition& d) {
  std::vector<BinaryMask> out;
  out.reserve(d.occ_mask.size());
  for (const ScalarMask& m : d.occ_mask) {
    BinaryMask b(m.height(), m.width(), 0);
    const auto v = m.data();
    for (std::size_t i = 0; i < v.size(); ++i) b.set(i, v[i] > kMaskThreshold);
    out.push_back(std::move(b));
  }
  return out;
}

Image reconstruct_view(const Decomposition& d, int view) {
  if (view < 0 || view >= d.views()) throw ArgumentError("reconstruct_view: view index out of range");
  const ScalarMask& m = d.occ_mask[view];
  BinaryMask b(m.height(), m.width(), 0);
  for (std::size_t i = 0; i < m.pixels(); ++i) b.set(i, m.data()[i] > kMaskThreshold);
  return clamp01(compose(d.oi, d.shadow[view], d.light[view], b, d.occ_content[view]));
}

SampleRecord evaluate_sample(const synth::SceneSample& sample, const Decomposition& result) {
  result.validate();
  const int n = sample.num_views();
  if (result.views() != n || static_cast<int>(sample.gt_occ_mask.size()) != n) {
    throw DimensionError("evaluate_sample: view count differs between sample and result");
  }
  require_same_shape(result.oi, sample.origin, "evaluate_sample");

  SampleRecord r;
  r.oi_mse = mse255(result.oi, sample.origin);
  r.oi_ssim = ssim(result.oi, sample.origin);

  const auto pred = binarize_masks(result);
  std::size_t negatives = 0;
  std::size_t false_pos = 0;
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (int i = 0; i < n; ++i) {
    const Image& view = sample.views[i];
    const BinaryMask& gt = sample.gt_occ_mask[i];
    const Image sl = clamp01(sl_compose(result.oi, result.shadow[i], result.light[i]));
    const MetricPair slm = masked_metrics(sl, view, gt);
    r.sl_mse_masked += slm.mse;
    r.sl_ssim_masked += slm.ssim;

    const Image recon = reconstruct_view(result, i);
    r.full_mse += mse255(recon, view);
    r.full_ssim += ssim(recon, view);

    require_same_extent(pred[i], gt, "evaluate_sample masks");
    const auto p = pred[i].data();
    const auto g = gt.data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!g[j]) {
        ++negatives;
        false_pos += p[j];
      }
      inter += (p[j] & g[j]);
      uni += (p[j] | g[j]);
    }
  }
  r.sl_mse_masked /= n;
  r.sl_ssim_masked /= n;
  r.full_mse /= n;
  r.full_ssim /= n;
  r.occ_fpr = negatives == 0 ? 0.0 : double(false_pos) / double(negatives);
  r.occ_iou = uni == 0 ? 1.0 : double(inter) / double(uni);
  return r;
}

BaselineMetrics random_baseline(std::span<const Image> origins, std::uint64_t seed) {
  if (origins.size() < 2) throw ArgumentError("random_baseline: need at least two origins");
  synth::Philox4x32 rng(seed, kBaselineStream);
  const int n = static_cast<int>(origins.size());
  BaselineMetrics m;
  for (int k = 0; k < n; ++k) {
    int j = rng.uniform_int(0, n - 2);
    if (j >= k) ++j;
    m.rand_mse += mse255(origins[k], origins[j]);
    m.rand_ssim += ssim(origins[k], origins[j]);
  }
  m.rand_mse /= double(n);
  m.rand_ssim /= double(n);
  return m;
}

void EvalReport::recompute_mean() {
  SampleRecord m;
  m.sample_id = "mean";
  if (!records.empty()) {
    for (const SampleRecord& r : records) {
      m.oi_mse += r.oi_mse;
      m.oi_ssim += r.oi_ssim;
      m.sl_mse_masked += r.sl_mse_masked;
      m.sl_ssim_masked += r.sl_ssim_masked;
      m.full_mse += r.full_mse;
      m.full_ssim += r.full_ssim;
      m.occ_fpr += r.occ_fpr;
      m.occ_iou += r.occ_iou;
    }
    const double n = double(records.size());
    m.oi_mse /= n;
    m.oi_ssim /= n;
    m.sl_mse_masked /= n;
    m.sl_ssim_masked /= n;
    m.full_mse /= n;
    m.full_ssim /= n;
    m.occ_fpr /= n;
    m.occ_iou /= n;
  }
  mean = m;
}

std::string report_json(const EvalReport& report) {
  ordered_json j;
  j["schema_version"] = 1;
  j["tool_version"] = report.header.tool_version;
  j["config_hash"] = report.header.config_hash;
  j["seed"] = report.header.seed;
  j["metrics"] = {
      {"mse_scale", 255},
      {"ssim",
       {{"window", SsimParams::window},
        {"sigma", SsimParams::sigma},
        {"k1", SsimParams::k1},
        {"k2", SsimParams::k2},
        {"dynamic_range", SsimParams::dynamic_range},
        {"channel", "luma-bt709"},
        {"windows", "valid"}}},
      {"mask_threshold", kMaskThreshold},
  };
  ordered_json samples = ordered_json::array();
  for (const SampleRecord& r : report.records) samples.push_back(record_json(r));
  j["samples"] = std::move(samples);
  ordered_json mean = record_json(report.mean);
  mean.erase("sample_id");
  j["mean"] = std::move(mean);
  if (report.baseline) {
    j["random_baseline"] = {{"rand_mse", report.baseline->rand_mse},
                            {"rand_ssim", report.baseline->rand_ssim}};
  } else {
    j["random_baseline"] = nullptr;
  }
  j["failures"] = report.failures;
  return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& report) {
  std::string out;
  out += "# tool_version=" + report.header.tool_version +
         " config_hash=" + report.header.config_hash + " seed=" + std::to_string(report.header.seed) +
         "\n";
  out += "# ssim window=11 sigma=1.5 k1=0.01 k2=0.03 dynamic_range=1 channel=luma-bt709 "
         "windows=valid; mse_scale=255; mask_threshold=0.5\n";
  out += "sample_id,oi_mse,oi_ssim,sl_mse_masked,sl_ssim_masked,full_mse,full_ssim,occ_fpr,occ_iou\n";
  auto row = [&out](const SampleRecord& r) {
    out += r.sample_id + ',' + num(r.oi_mse) + ',' + num(r.oi_ssim) + ',' + num(r.sl_mse_masked) +
           ',' + num(r.sl_ssim_masked) + ',' + num(r.full_mse) + ',' + num(r.full_ssim) + ',' +
           num(r.occ_fpr) + ',' + num(r.occ_iou) + '\n';
  };
  for (const SampleRecord& r : report.records) row(r);
  row(report.mean);
  return out;
}

}  // namespace decomposer::eval
