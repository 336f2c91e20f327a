#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "decomposer/pseudolabel/pseudolabel.hpp"
#include "decomposer/solver/solver.hpp"
#include "decomposer/synthgen/params.hpp"

namespace decomposer::pipeline {

inline constexpr int kSchemaVersion = 1;

std::string tool_version();

// Where the solver's OI estimate comes from: the per-pixel median of the
// views with no OI loss, or the dataset's origin.png as initialization and
// supervision target.
enum class OiSupervision { none, ground_truth };

struct PipelineConfig {
  synth::GeneratorConfig generator;
  // Optional directory of PNG originals; procedural originals when empty.
  std::filesystem::path origin_dir;
  pseudo::PseudoLabelConfig pseudolabel;
  opt::SolverConfig solver;  // loss weights live in solver.loss_weights
  OiSupervision oi_supervision = OiSupervision::none;
  std::filesystem::path dataset_root = "dataset";
  std::filesystem::path output_root = "out";
  int jobs = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Canonical document with every field present.
nlohmann::ordered_json to_json(const PipelineConfig& cfg);

// Missing keys keep their defaults. Unknown keys, wrong value types and a
// missing or different schema_version raise ArgumentError.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the canonical JSON without the paths and job count, as 16
// hex digits. Runs that differ only in where files live or how many
// threads they use share a hash.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace decomposer::pipeline
