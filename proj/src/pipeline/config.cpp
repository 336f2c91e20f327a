#include "decomposer/pipeline/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "decomposer/errors.hpp"

namespace decomposer::pipeline {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads known members of one JSON object and rejects everything else.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ArgumentError(where() + ": expected an object");
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw type_error(key, "a number");
      out = v->get<double>();
    }
  }

  void get(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw type_error(key, "an integer");
      out = v->get<int>();
    }
  }

  void get(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw type_error(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw type_error(key, "a string");
      out = v->get<std::string>();
    }
  }

  void get(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  void get(const char* key, synth::Range& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw type_error(key, "a [lo, hi] pair of numbers");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  void get(const char* key, synth::CountRange& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() ||
          !(*v)[1].is_number_integer()) {
        throw type_error(key, "a [min, max] pair of integers");
      }
      out = {(*v)[0].get<int>(), (*v)[1].get<int>()};
    }
  }

  // Nested object or nullptr when absent.
  const json* child(const char* key) {
    const json* v = find(key);
    if (v != nullptr && !v->is_object()) throw type_error(key, "an object");
    return v;
  }

  std::string child_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw ArgumentError("unknown configuration key '" + child_path(item.key().c_str()) + "'");
      }
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string where() const { return path_.empty() ? "configuration" : path_; }

  ArgumentError type_error(const char* key, const char* expected) const {
    return ArgumentError("configuration key '" + child_path(key) + "' must be " + expected);
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

ordered_json range_json(const synth::Range& r) { return ordered_json::array({r.lo, r.hi}); }
ordered_json count_json(const synth::CountRange& r) { return ordered_json::array({r.min, r.max}); }

void read_generator(const json& obj, const std::string& path, synth::GeneratorConfig& g) {
  ObjectReader r(obj, path);
  r.get("height", g.height);
  r.get("width", g.width);
  r.get("num_views", g.num_views);
  r.get("ambient", g.ambient);
  r.get("shadow_count", g.shadow_count);
  r.get("shadow_intensity", g.shadow_intensity);
  r.get("shadow_radius", g.shadow_radius);
  r.get("feather_sigma", g.feather_sigma);
  r.get("spotlight_count", g.spotlight_count);
  r.get("spotlight_intensity", g.spotlight_intensity);
  r.get("spotlight_sigma", g.spotlight_sigma);
  r.get("occluder_count", g.occluder_count);
  r.get("occluder_radius", g.occluder_radius);
  r.get("opaque_fraction", g.opaque_fraction);
  r.get("occluder_alpha", g.occluder_alpha);
  r.get("max_occlusion_coverage", g.max_occlusion_coverage);
  r.get("texture_amplitude", g.texture_amplitude);
  r.get("texture_cell", g.texture_cell);
  r.finish();
}

void read_solver(const json& obj, const std::string& path, PipelineConfig& cfg) {
  ObjectReader r(obj, path);
  opt::SolverConfig& s = cfg.solver;
  r.get("sl_steps", s.sl_steps);
  r.get("occ_steps", s.occ_steps);
  r.get("joint_steps", s.joint_steps);
  r.get("step_size", s.adam.step_size);
  r.get("beta1", s.adam.beta1);
  r.get("beta2", s.adam.beta2);
  r.get("eps", s.adam.eps);
  r.get("convergence_tol", s.convergence_tol);
  r.get("convergence_window", s.convergence_window);
  std::string stages = s.stages.str();
  r.get("stages", stages);
  s.stages = opt::StageSet::parse(stages);
  std::string oi = cfg.oi_supervision == OiSupervision::none ? "none" : "ground_truth";
  r.get("oi_supervision", oi);
  if (oi == "none") {
    cfg.oi_supervision = OiSupervision::none;
  } else if (oi == "ground_truth") {
    cfg.oi_supervision = OiSupervision::ground_truth;
  } else {
    throw ArgumentError("solver.oi_supervision must be \"none\" or \"ground_truth\"");
  }
  r.finish();
}

}  // namespace

std::string tool_version() { return DECOMPOSER_VERSION; }

void PipelineConfig::validate() const {
  generator.validate();
  pseudolabel.validate();
  solver.validate();
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
}

ordered_json to_json(const PipelineConfig& cfg) {
  const synth::GeneratorConfig& g = cfg.generator;
  const opt::SolverConfig& s = cfg.solver;
  const LossWeights& w = s.loss_weights;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = cfg.seed;
  j["dataset_root"] = cfg.dataset_root.string();
  j["output_root"] = cfg.output_root.string();
  j["jobs"] = cfg.jobs;
  j["origin_dir"] = cfg.origin_dir.string();
  j["generator"] = {
      {"height", g.height},
      {"width", g.width},
      {"num_views", g.num_views},
      {"ambient", range_json(g.ambient)},
      {"shadow_count", count_json(g.shadow_count)},
      {"shadow_intensity", range_json(g.shadow_intensity)},
      {"shadow_radius", range_json(g.shadow_radius)},
      {"feather_sigma", g.feather_sigma},
      {"spotlight_count", count_json(g.spotlight_count)},
      {"spotlight_intensity", range_json(g.spotlight_intensity)},
      {"spotlight_sigma", range_json(g.spotlight_sigma)},
      {"occluder_count", count_json(g.occluder_count)},
      {"occluder_radius", range_json(g.occluder_radius)},
      {"opaque_fraction", g.opaque_fraction},
      {"occluder_alpha", range_json(g.occluder_alpha)},
      {"max_occlusion_coverage", g.max_occlusion_coverage},
      {"texture_amplitude", g.texture_amplitude},
      {"texture_cell", g.texture_cell},
  };
  j["pseudolabel"] = {
      {"blur_sigma", cfg.pseudolabel.blur_sigma},
      {"occ_threshold", cfg.pseudolabel.occ_threshold},
      {"shadow_floor", cfg.pseudolabel.shadow_floor},
  };
  j["solver"] = {
      {"sl_steps", s.sl_steps},
      {"occ_steps", s.occ_steps},
      {"joint_steps", s.joint_steps},
      {"step_size", s.adam.step_size},
      {"beta1", s.adam.beta1},
      {"beta2", s.adam.beta2},
      {"eps", s.adam.eps},
      {"convergence_tol", s.convergence_tol},
      {"convergence_window", s.convergence_window},
      {"stages", s.stages.str()},
      {"oi_supervision", cfg.oi_supervision == OiSupervision::none ? "none" : "ground_truth"},
  };
  j["loss_weights"] = {
      {"alpha_decomp", w.alpha_decomp},
      {"alpha_oi", w.alpha_oi},
      {"mask_decay_weight", w.mask_decay_weight},
  };
  return j;
}

PipelineConfig config_from_json(const json& doc) {
  ObjectReader r(doc, "");
  int version = -1;
  r.get("schema_version", version);
  if (version == -1) throw ArgumentError("configuration has no schema_version");
  if (version != kSchemaVersion) {
    throw ArgumentError("unsupported schema_version " + std::to_string(version) + " (expected " +
                        std::to_string(kSchemaVersion) + ")");
  }
  PipelineConfig cfg;
  r.get("seed", cfg.seed);
  r.get("dataset_root", cfg.dataset_root);
  r.get("output_root", cfg.output_root);
  r.get("jobs", cfg.jobs);
  r.get("origin_dir", cfg.origin_dir);
  if (const json* g = r.child("generator")) read_generator(*g, "generator", cfg.generator);
  if (const json* p = r.child("pseudolabel")) {
    ObjectReader pr(*p, "pseudolabel");
    pr.get("blur_sigma", cfg.pseudolabel.blur_sigma);
    pr.get("occ_threshold", cfg.pseudolabel.occ_threshold);
    pr.get("shadow_floor", cfg.pseudolabel.shadow_floor);
    pr.finish();
  }
  if (const json* s = r.child("solver")) read_solver(*s, "solver", cfg);
  if (const json* w = r.child("loss_weights")) {
    ObjectReader wr(*w, "loss_weights");
    wr.get("alpha_decomp", cfg.solver.loss_weights.alpha_decomp);
    wr.get("alpha_oi", cfg.solver.loss_weights.alpha_oi);
    wr.get("mask_decay_weight", cfg.solver.loss_weights.mask_decay_weight);
    wr.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArgumentError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

std::string config_hash(const PipelineConfig& cfg) {
  ordered_json j = to_json(cfg);
  j.erase("dataset_root");
  j.erase("output_root");
  j.erase("jobs");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace decomposer::pipeline
