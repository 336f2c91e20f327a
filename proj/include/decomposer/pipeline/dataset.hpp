#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "decomposer/decomp/decomposition.hpp"
#include "decomposer/pseudolabel/pseudolabel.hpp"
#include "decomposer/solver/solver.hpp"
#include "decomposer/synthgen/generator.hpp"

// On-disk layout.
//
//   <dataset>/<sample_id>/origin.png
//                        /view_XX.png
//                        /gt/{shadow,light,occmask,occ}_XX.png
//                        /pseudo/{shadow,light,occmask,sl}_XX.png
//                        /manifest.json
//   <out>/<sample_id>/{oi,sl_XX,shadow_XX,light_XX,occmask_XX,occ_XX,recon_XX}.png
//                    /trace.json
//   <out>/report.json, <out>/report.csv
namespace decomposer::pipeline {

namespace fs = std::filesystem;

std::string sample_id(int index);

// "<prefix>_XX.png" for zero-based view index i, where XX = i + 1 with at
// least two digits (files are numbered 01..NN).
std::string indexed_name(const char* prefix, int view);

// Sample directories under `root` that hold a manifest.json, sorted by name.
std::vector<std::string> list_samples(const fs::path& root);

struct Provenance {
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json provenance_json(const Provenance& p);

// Writes every raster of the sample plus a manifest with the per-view
// augmentation parameters.
void write_sample(const fs::path& dir, const std::string& id, const synth::SceneSample& sample,
                  const std::string& origin_source, const Provenance& prov);

// Reads origin, views and ground-truth occlusion masks (the fields needed
// for solving and scoring). Per-view parameters are not restored.
synth::SceneSample read_sample(const fs::path& dir);

// View count recorded in the manifest.
int manifest_views(const fs::path& dir);

bool has_pseudo_labels(const fs::path& dir, int views);
void write_pseudo_labels(const fs::path& dir, const pseudo::PseudoLabels& labels);
// Shadow masks are clamped back to [shadow_floor, 1] after 8-bit loading.
pseudo::PseudoLabels read_pseudo_labels(const fs::path& dir, int views, double shadow_floor);

// Round-trips the labels through 8-bit storage in memory so that labels
// computed on demand match ones read back from disk.
pseudo::PseudoLabels quantize_labels(const pseudo::PseudoLabels& labels, double shadow_floor);

void write_result(const fs::path& dir, const Decomposition& d);
Decomposition read_result(const fs::path& dir, int views);

nlohmann::ordered_json trace_json(const opt::SolveTrace& trace, const std::string& id,
                                  const Provenance& prov);

void write_text(const fs::path& path, const std::string& text);

}  // namespace decomposer::pipeline
