#include "decomposer/pipeline/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "decomposer/decomp/compose.hpp"
#include "decomposer/errors.hpp"
#include "decomposer/evalkit/evaluate.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/imgcore/png_io.hpp"

namespace decomposer::pipeline {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json point_json(const synth::Point& p) { return ordered_json::array({p.x, p.y}); }

ordered_json params_json(const synth::AugmentationParams& p) {
  ordered_json j;
  j["ambient_factor"] = p.ambient_factor;
  ordered_json shadows = ordered_json::array();
  for (const synth::HardShadow& h : p.hard_shadows) {
    ordered_json poly = ordered_json::array();
    for (const synth::Point& q : h.polygon) poly.push_back(point_json(q));
    shadows.push_back({{"polygon", poly},
                       {"intensity", h.intensity},
                       {"feather_sigma", h.feather_sigma}});
  }
  j["hard_shadows"] = std::move(shadows);
  ordered_json spots = ordered_json::array();
  for (const synth::Spotlight& s : p.spotlights) {
    spots.push_back({{"center", point_json(s.center)},
                     {"radius_sigma", s.radius_sigma},
                     {"intensity", s.intensity}});
  }
  j["spotlights"] = std::move(spots);
  ordered_json occs = ordered_json::array();
  for (const synth::Occluder& o : p.occluders) {
    ordered_json e;
    if (o.shape == synth::OccluderShape::ellipse) {
      e["shape"] = "ellipse";
      e["center"] = point_json(o.center);
      e["radius_x"] = o.radius_x;
      e["radius_y"] = o.radius_y;
      e["angle"] = o.angle;
    } else {
      e["shape"] = "polygon";
      ordered_json poly = ordered_json::array();
      for (const synth::Point& q : o.polygon) poly.push_back(point_json(q));
      e["polygon"] = std::move(poly);
    }
    e["color"] = o.color;
    e["alpha"] = o.alpha;
    e["texture_seed"] = o.texture_seed;
    occs.push_back(std::move(e));
  }
  j["occluders"] = std::move(occs);
  return j;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void require_rgb_frame(const Image& img, const Image& ref, const fs::path& path) {
  if (!img.same_shape(ref)) {
    throw FormatError(path.string() + ": raster shape differs from origin.png");
  }
}

}  // namespace

std::string sample_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04d", index);
  return buf;
}

std::string indexed_name(const char* prefix, int view) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02d.png", prefix, view + 1);
  return buf;
}

std::vector<std::string> list_samples(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

ordered_json provenance_json(const Provenance& p) {
  return {{"tool_version", p.tool_version}, {"config_hash", p.config_hash}, {"seed", p.seed}};
}

void write_sample(const fs::path& dir, const std::string& id, const synth::SceneSample& sample,
                  const std::string& origin_source, const Provenance& prov) {
  fs::create_directories(dir / "gt");
  write_png(dir / "origin.png", sample.origin);
  ordered_json views = ordered_json::array();
  for (int i = 0; i < sample.num_views(); ++i) {
    write_png(dir / indexed_name("view", i), sample.views[i]);
    write_png(dir / "gt" / indexed_name("shadow", i), sample.gt_shadow[i]);
    write_png(dir / "gt" / indexed_name("light", i), sample.gt_light[i]);
    write_png(dir / "gt" / indexed_name("occmask", i), sample.gt_occ_mask[i]);
    write_png(dir / "gt" / indexed_name("occ", i), sample.gt_occ_content[i]);
    ordered_json v = params_json(sample.params[i]);
    v["view"] = i + 1;
    v["occlusion_coverage"] = sample.gt_occ_mask[i].coverage();
    views.push_back(std::move(v));
  }
  ordered_json m;
  m["schema_version"] = 1;
  m["sample_id"] = id;
  m["provenance"] = provenance_json(prov);
  m["sample_seed"] = sample.seed;
  m["origin_source"] = origin_source;
  m["height"] = sample.origin.height();
  m["width"] = sample.origin.width();
  m["channels"] = sample.origin.channels();
  m["num_views"] = sample.num_views();
  m["views"] = std::move(views);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

int manifest_views(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  auto it = m.find("num_views");
  if (it == m.end() || !it->is_number_integer() || it->get<int>() < 1) {
    throw FormatError((dir / "manifest.json").string() + ": missing or invalid num_views");
  }
  return it->get<int>();
}

synth::SceneSample read_sample(const fs::path& dir) {
  const int n = manifest_views(dir);
  synth::SceneSample s;
  s.origin = read_png(dir / "origin.png");
  for (int i = 0; i < n; ++i) {
    const fs::path vp = dir / indexed_name("view", i);
    if (!fs::exists(vp)) throw IoError("missing view " + vp.string());
    s.views.push_back(read_png(vp));
    require_rgb_frame(s.views.back(), s.origin, vp);
    const fs::path mp = dir / "gt" / indexed_name("occmask", i);
    if (fs::exists(mp)) s.gt_occ_mask.push_back(read_binary_mask_png(mp));
  }
  if (!s.gt_occ_mask.empty() && static_cast<int>(s.gt_occ_mask.size()) != n) {
    throw IoError("incomplete ground-truth masks in " + (dir / "gt").string());
  }
  return s;
}

bool has_pseudo_labels(const fs::path& dir, int views) {
  const fs::path p = dir / "pseudo";
  for (int i = 0; i < views; ++i) {
    for (const char* prefix : {"shadow", "light", "occmask", "sl"}) {
      if (!fs::exists(p / indexed_name(prefix, i))) return false;
    }
  }
  return true;
}

void write_pseudo_labels(const fs::path& dir, const pseudo::PseudoLabels& labels) {
  const fs::path p = dir / "pseudo";
  fs::create_directories(p);
  for (int i = 0; i < labels.views(); ++i) {
    write_png(p / indexed_name("shadow", i), labels.shadow[i]);
    write_png(p / indexed_name("light", i), labels.light[i]);
    write_png(p / indexed_name("occmask", i), labels.occ_mask[i]);
    write_png(p / indexed_name("sl", i), labels.sl_target[i]);
  }
}

pseudo::PseudoLabels read_pseudo_labels(const fs::path& dir, int views, double shadow_floor) {
  const fs::path p = dir / "pseudo";
  pseudo::PseudoLabels labels;
  for (int i = 0; i < views; ++i) {
    ScalarMask s = read_scalar_mask_png(p / indexed_name("shadow", i));
    for (double& v : s.data()) v = std::max(v, shadow_floor);
    labels.shadow.push_back(std::move(s));
    labels.light.push_back(read_scalar_mask_png(p / indexed_name("light", i)));
    labels.occ_mask.push_back(read_binary_mask_png(p / indexed_name("occmask", i)));
    labels.sl_target.push_back(read_png(p / indexed_name("sl", i)));
  }
  return labels;
}

pseudo::PseudoLabels quantize_labels(const pseudo::PseudoLabels& labels, double shadow_floor) {
  pseudo::PseudoLabels q;
  for (int i = 0; i < labels.views(); ++i) {
    ScalarMask s = quantize8(labels.shadow[i]);
    for (double& v : s.data()) v = std::max(v, shadow_floor);
    q.shadow.push_back(std::move(s));
    q.light.push_back(quantize8(labels.light[i]));
    q.occ_mask.push_back(labels.occ_mask[i]);
    q.sl_target.push_back(quantize8(labels.sl_target[i]));
  }
  return q;
}

void write_result(const fs::path& dir, const Decomposition& d) {
  fs::create_directories(dir);
  write_png(dir / "oi.png", d.oi);
  const auto masks = eval::binarize_masks(d);
  for (int i = 0; i < d.views(); ++i) {
    write_png(dir / indexed_name("sl", i), clamp01(sl_compose(d.oi, d.shadow[i], d.light[i])));
    write_png(dir / indexed_name("shadow", i), d.shadow[i]);
    write_png(dir / indexed_name("light", i), d.light[i]);
    write_png(dir / indexed_name("occmask", i), masks[i]);
    write_png(dir / indexed_name("occ", i), d.occ_content[i]);
    write_png(dir / indexed_name("recon", i), eval::reconstruct_view(d, i));
  }
}

Decomposition read_result(const fs::path& dir, int views) {
  Decomposition d;
  d.oi = read_png(dir / "oi.png");
  for (int i = 0; i < views; ++i) {
    d.shadow.push_back(read_scalar_mask_png(dir / indexed_name("shadow", i)));
    d.light.push_back(read_scalar_mask_png(dir / indexed_name("light", i)));
    d.occ_mask.push_back(to_scalar(read_binary_mask_png(dir / indexed_name("occmask", i))));
    d.occ_content.push_back(read_png(dir / indexed_name("occ", i)));
  }
  d.validate();
  return d;
}

ordered_json trace_json(const opt::SolveTrace& trace, const std::string& id, const Provenance& prov) {
  ordered_json j;
  j["schema_version"] = 1;
  j["sample_id"] = id;
  j["provenance"] = provenance_json(prov);
  ordered_json stages = ordered_json::array();
  for (const opt::StageTrace& s : trace.stages) {
    stages.push_back({{"stage", opt::stage_name(s.stage)},
                      {"steps", s.steps},
                      {"termination", opt::termination_name(s.termination)},
                      {"best_loss", s.best.empty() ? 0.0 : s.best.back()},
                      {"losses", s.losses}});
  }
  j["stages"] = std::move(stages);
  j["final_loss"] = trace.final_loss;
  j["warnings"] = trace.warnings;
  j["wall_seconds"] = trace.wall_seconds;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace decomposer::pipeline
