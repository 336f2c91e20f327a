#include "decomposer/pipeline/commands.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include "decomposer/errors.hpp"
#include "decomposer/evalkit/evaluate.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/imgcore/png_io.hpp"
#include "decomposer/pipeline/dataset.hpp"
#include "decomposer/synthgen/philox.hpp"

namespace decomposer::pipeline {
namespace {

Provenance provenance(const PipelineConfig& cfg) {
  return {tool_version(), config_hash(cfg), cfg.seed};
}

// Per-sample failure slots filled concurrently, flattened in sample order.
class FailureLog {
 public:
  FailureLog(int count, std::ostream& log) : slots_(static_cast<std::size_t>(count)), log_(log) {}

  void record(int index, const std::string& id, const std::string& reason) {
    slots_[static_cast<std::size_t>(index)] = id + ": " + reason;
    std::lock_guard lock(mutex_);
    log_ << "error: " << id << ": " << reason << '\n';
  }

  void note(const std::string& line) {
    std::lock_guard lock(mutex_);
    log_ << line << '\n';
  }

  CommandResult result() const {
    CommandResult r;
    for (const auto& s : slots_) {
      if (s) {
        r.failures.push_back(*s);
      } else {
        ++r.processed;
      }
    }
    return r;
  }

 private:
  std::vector<std::optional<std::string>> slots_;
  std::ostream& log_;
  std::mutex mutex_;
};

template <typename Body>
CommandResult run_samples(const std::vector<std::string>& ids, int jobs, std::ostream& log,
                          Body&& body) {
  FailureLog failures(static_cast<int>(ids.size()), log);
  parallel_for(static_cast<int>(ids.size()), jobs, [&](int i) {
    try {
      body(i, ids[static_cast<std::size_t>(i)], failures);
    } catch (const std::exception& e) {
      failures.record(i, ids[static_cast<std::size_t>(i)], e.what());
    }
  });
  return failures.result();
}

std::vector<fs::path> origin_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("origin directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no PNG files in origin directory " + dir.string());
  return files;
}

Image center_crop(const Image& img, int height, int width, const fs::path& source) {
  if (img.height() < height || img.width() < width) {
    throw FormatError(source.string() + " is smaller than the " + std::to_string(height) + "x" +
                      std::to_string(width) + " frame");
  }
  return crop(img, (img.height() - height) / 2, (img.width() - width) / 2, height, width);
}

}  // namespace

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
}

CommandResult cmd_generate(const PipelineConfig& cfg, int count, std::ostream& log) {
  cfg.validate();
  if (count < 1) throw ArgumentError("count must be >= 1");
  const std::vector<fs::path> files =
      cfg.origin_dir.empty() ? std::vector<fs::path>{} : origin_files(cfg.origin_dir);
  fs::create_directories(cfg.dataset_root);
  const Provenance prov = provenance(cfg);

  std::vector<std::string> ids;
  for (int k = 0; k < count; ++k) ids.push_back(sample_id(k));
  return run_samples(ids, cfg.jobs, log, [&](int k, const std::string& id, FailureLog&) {
    const std::uint64_t base = synth::mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
    Image origin;
    std::string source;
    if (files.empty()) {
      origin = synth::procedural_origin(base, cfg.generator.height, cfg.generator.width);
      source = "procedural";
    } else {
      const fs::path& f = files[static_cast<std::size_t>(k) % files.size()];
      origin = center_crop(read_png(f), cfg.generator.height, cfg.generator.width, f);
      source = f.filename().string();
    }
    // Stored originals are 8-bit, so views are rendered from the quantized one.
    origin = quantize8(origin);
    const synth::SceneSample sample = synth::generate_sequence(origin, base, cfg.generator);
    write_sample(cfg.dataset_root / id, id, sample, source, prov);
  });
}

CommandResult cmd_pseudolabel(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::vector<std::string> ids = list_samples(cfg.dataset_root);
  return run_samples(ids, cfg.jobs, log, [&](int, const std::string& id, FailureLog&) {
    const fs::path dir = cfg.dataset_root / id;
    const synth::SceneSample s = read_sample(dir);
    write_pseudo_labels(dir, pseudo::make_pseudo_labels(s.origin, s.views, cfg.pseudolabel));
  });
}

CommandResult cmd_solve(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::vector<std::string> ids = list_samples(cfg.dataset_root);
  const Provenance prov = provenance(cfg);
  return run_samples(ids, cfg.jobs, log, [&](int, const std::string& id, FailureLog& notes) {
    const fs::path dir = cfg.dataset_root / id;
    const synth::SceneSample s = read_sample(dir);
    const int n = s.num_views();
    const pseudo::PseudoLabels labels =
        has_pseudo_labels(dir, n)
            ? read_pseudo_labels(dir, n, cfg.pseudolabel.shadow_floor)
            : quantize_labels(pseudo::make_pseudo_labels(s.origin, s.views, cfg.pseudolabel),
                              cfg.pseudolabel.shadow_floor);
    const Image* gt_oi = cfg.oi_supervision == OiSupervision::ground_truth ? &s.origin : nullptr;
    const opt::SolveResult r = opt::solve(s.views, labels, cfg.solver, gt_oi);
    const fs::path out = cfg.output_root / id;
    write_result(out, r.decomposition);
    write_text(out / "trace.json", trace_json(r.trace, id, prov).dump(2) + "\n");
    for (const std::string& w : r.trace.warnings) notes.note("warning: " + id + ": " + w);
  });
}

CommandResult cmd_eval(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::vector<std::string> ids = list_samples(cfg.dataset_root);
  std::vector<std::optional<eval::SampleRecord>> records(ids.size());
  std::vector<Image> origins(ids.size());

  CommandResult result =
      run_samples(ids, cfg.jobs, log, [&](int i, const std::string& id, FailureLog&) {
        const synth::SceneSample s = read_sample(cfg.dataset_root / id);
        origins[static_cast<std::size_t>(i)] = s.origin;
        if (static_cast<int>(s.gt_occ_mask.size()) != s.num_views()) {
          throw IoError("ground-truth occlusion masks missing");
        }
        const fs::path out = cfg.output_root / id;
        if (!fs::is_directory(out)) throw IoError("no results in " + out.string());
        eval::SampleRecord rec = eval::evaluate_sample(s, read_result(out, s.num_views()));
        rec.sample_id = id;
        records[static_cast<std::size_t>(i)] = std::move(rec);
      });

  eval::EvalReport report;
  report.header = {tool_version(), config_hash(cfg), cfg.seed};
  for (auto& r : records) {
    if (r) report.records.push_back(std::move(*r));
  }
  report.recompute_mean();
  report.failures = result.failures;
  std::vector<Image> loaded;
  for (Image& o : origins) {
    if (!o.empty()) loaded.push_back(std::move(o));
  }
  if (loaded.size() >= 2) report.baseline = eval::random_baseline(loaded, cfg.seed);

  write_text(cfg.output_root / "report.json", eval::report_json(report));
  write_text(cfg.output_root / "report.csv", eval::report_csv(report));
  return result;
}

}  // namespace decomposer::pipeline
