// decomposer: generate synthetic sequences, derive pseudo-labels, solve for
// the decomposition and score the results.
//
//   decomposer generate    --config cfg.json --count 20
//   decomposer pseudolabel --dataset data
//   decomposer solve       --dataset data --out results --jobs 4
//   decomposer eval        --dataset data --out results

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "decomposer/errors.hpp"
#include "decomposer/pipeline/commands.hpp"
#include "decomposer/pipeline/config.hpp"
#include "decomposer/simd/kernels.hpp"

namespace {

using decomposer::pipeline::PipelineConfig;

struct Overrides {
  std::string config;
  std::string dataset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string stages;
  int count = 1;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", o.dataset, "dataset root directory");
  cmd->add_option("--out", o.out, "results directory");
  cmd->add_option("--seed", o.seed, "global seed");
  cmd->add_option("--jobs", o.jobs, "parallel samples")->check(CLI::PositiveNumber);
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : decomposer::pipeline::load_config(o.config);
  if (!o.dataset.empty()) cfg.dataset_root = o.dataset;
  if (!o.out.empty()) cfg.output_root = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.stages.empty()) cfg.solver.stages = decomposer::opt::StageSet::parse(o.stages);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shadow, light and occlusion decomposition of image sequences"};
  app.set_version_flag("--version", decomposer::pipeline::tool_version());
  app.require_subcommand(1);

  Overrides o;
  auto* gen = app.add_subcommand("generate", "write synthetic samples to the dataset root");
  add_common(gen, o);
  gen->add_option("--count", o.count, "number of samples")->check(CLI::PositiveNumber);
  auto* pl = app.add_subcommand("pseudolabel", "compute pseudo-labels for every sample");
  add_common(pl, o);
  auto* sv = app.add_subcommand("solve", "decompose every sample");
  add_common(sv, o);
  sv->add_option("--stages", o.stages, "subset of sl,occ,joint");
  auto* ev = app.add_subcommand("eval", "score results and write report.json/report.csv");
  add_common(ev, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  PipelineConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const decomposer::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    decomposer::pipeline::CommandResult r;
    if (*gen) {
      r = decomposer::pipeline::cmd_generate(cfg, o.count, std::cerr);
    } else if (*pl) {
      r = decomposer::pipeline::cmd_pseudolabel(cfg, std::cerr);
    } else if (*sv) {
      std::cerr << "kernels: " << decomposer::simd::isa_name(decomposer::simd::kernels().isa) << '\n';
      r = decomposer::pipeline::cmd_solve(cfg, std::cerr);
    } else {
      r = decomposer::pipeline::cmd_eval(cfg, std::cerr);
    }
    std::cerr << r.processed << " sample(s) done, " << r.failures.size() << " failed\n";
    return r.exit_code();
  } catch (const decomposer::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
