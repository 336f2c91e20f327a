#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "decomposer/pipeline/config.hpp"

namespace decomposer::pipeline {

// Outcome of a batch command. Failures are per sample and do not stop the
// remaining samples; they are listed in sample order.
struct CommandResult {
  int processed = 0;
  std::vector<std::string> failures;  // "<sample_id>: <reason>"

  int exit_code() const { return failures.empty() ? 0 : 2; }
};

// Runs body(i) for i in [0, count) on `jobs` threads. Exceptions escape
// only through the caller's body; the helper itself never throws.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

// Writes `count` samples into cfg.dataset_root. Sample k uses base seed
// mix_seed(cfg.seed, k) and either the k-th PNG of cfg.origin_dir (cycled,
// center-cropped to the frame) or a procedural original.
CommandResult cmd_generate(const PipelineConfig& cfg, int count, std::ostream& log);

CommandResult cmd_pseudolabel(const PipelineConfig& cfg, std::ostream& log);

// Solves every sample into cfg.output_root. Pseudo-labels are read from the
// dataset when present and computed on the fly otherwise.
CommandResult cmd_solve(const PipelineConfig& cfg, std::ostream& log);

// Scores cfg.output_root against cfg.dataset_root and writes report.json
// and report.csv there. Poor metrics are not failures; missing results are.
CommandResult cmd_eval(const PipelineConfig& cfg, std::ostream& log);

}  // namespace decomposer::pipeline
