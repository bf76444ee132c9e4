// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// compod: command-line front end. Every stage reads and writes files so it
// can be rerun on its own.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "compod/arrangement.hpp"
#include "compod/error.hpp"
#include "compod/extraction.hpp"
#include "compod/io.hpp"
#include "compod/labelling.hpp"
#include "compod/log.hpp"
#include "compod/memory.hpp"
#include "compod/metrics.hpp"
#include "compod/pipeline.hpp"
#include "compod/synthetic.hpp"

namespace fs = std::filesystem;
using namespace compod;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

// Values given on the command line; applied over the config file.
struct Flags {
  std::string config;
  std::optional<std::string> ordering, basis, label, tau;
  std::optional<double> padding, lambda;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  bool no_remesh = false, no_cell_merge = false, timing = false;
};

PipelineConfig resolve(const Flags& f) {
  PipelineConfig cfg;
  if (!f.config.empty()) apply_toml(cfg, read_file(f.config));
  if (f.ordering) cfg.ordering = parse_ordering(*f.ordering);
  if (f.basis) parse_basis(*f.basis, cfg);
  if (f.label) parse_label(*f.label, cfg);
  if (f.tau) parse_tau(*f.tau, cfg);
  if (f.padding) cfg.padding_frac = *f.padding;
  if (f.lambda) cfg.labelling.lambda = *f.lambda;
  if (f.samples) cfg.samples = *f.samples;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.out) cfg.out_dir = *f.out;
  if (f.no_remesh) cfg.remesh = false;
  if (f.no_cell_merge) cfg.cell_merge = false;
  if (f.timing) cfg.timing = true;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  return cfg;
}

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void write_report(const PipelineConfig& cfg, Report r, const std::string& name,
                  double wall_s) {
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg);
  if (cfg.timing) {
    r.time_s = wall_s;
    r.peak_mem_mb = static_cast<double>(peak_heap_bytes()) / (1024.0 * 1024.0);
  }
  write_file(out_path(cfg, name), report_to_json(r));
  fmt::print("{}", report_table(r));
}

// Complexity counts only; write_report fills in timings when asked.
Report counts(const SurfaceMesh* surface, const ConvexDecomposition* decomp,
              std::size_t cells) {
  return complexity_report(surface, decomp, cells, Report::kUnset, Report::kUnset);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct LabelSource {
  std::string labels_json, primitives, cloud;
};

// Labels from a saved labels file, or computed with the configured method.
OccupancyLabels obtain_labels(const Arrangement& arr, const PipelineConfig& cfg,
                              const LabelSource& src) {
  if (!src.labels_json.empty()) return labels_from_json(arr, read_file(src.labels_json));
  if (cfg.label_method == LabelMethod::Proxy) {
    const SurfaceMesh proxy = load_mesh(cfg.proxy_path);
    return label_arrangement(arr, cfg, {nullptr, nullptr, &proxy});
  }
  if (src.primitives.empty() || src.cloud.empty()) {
    throw ValidationError("normal labelling needs --primitives and --cloud (or --labels)");
  }
  const PointCloud cloud = load_point_cloud(src.cloud);
  const auto prims = load_primitives(src.primitives, cloud.points.size());
  return label_arrangement(arr, cfg, {&prims, &cloud, nullptr});
}

int cmd_detect(const Flags& flags, const std::string& cloud_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg = resolve(flags);
  const PointCloud cloud = load_point_cloud(cloud_path);
  const auto prims = detect_planes(cloud, cfg.detection);
  save_primitives(prims, out_path(cfg, "primitives.json"));
  fmt::print("{} primitives in {:.3f} s\n", prims.size(), seconds_since(t0));
  return 0;
}

int cmd_partition(const Flags& flags, const std::string& prim_path,
                  const std::string& cloud_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg = resolve(flags);
  reset_peak_heap();
  const PointCloud cloud = load_point_cloud(cloud_path);
  const auto prims = load_primitives(prim_path, cloud.points.size());
  const Arrangement arr = build_arrangement(prims, cloud, cfg.arrangement());
  write_file(out_path(cfg, "arrangement.json"), arrangement_to_json(arr));
  const ArrangementReport s = arrangement_stats(arr);
  fmt::print("cells {}  splits {}  max depth {}  adjacency edges {}\n", s.cells, s.splits,
             s.max_depth, s.edges);
  write_report(cfg, counts(nullptr, nullptr, s.cells),
               "partition_report.json", seconds_since(t0));
  return 0;
}

int cmd_surface(const Flags& flags, const std::string& arr_path, const LabelSource& src) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg = resolve(flags);
  reset_peak_heap();
  Arrangement arr = arrangement_from_json(read_file(arr_path));
  const OccupancyLabels labels = obtain_labels(arr, cfg, src);
  write_file(out_path(cfg, "labels.json"), labels_to_json(arr, labels));
  const SurfaceOutput s = surface_stage(arr, labels, cfg);
  save_mesh(s.raw, out_path(cfg, "surface.obj"));
  if (cfg.remesh) save_mesh(s.remeshed, out_path(cfg, "surface_remeshed.obj"));
  write_report(cfg, counts(&s.remeshed, nullptr, arr.leaves().size()),
               "surface_report.json", seconds_since(t0));
  return 0;
}

int cmd_decompose(const Flags& flags, const std::string& arr_path, const LabelSource& src) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg = resolve(flags);
  reset_peak_heap();
  const Arrangement arr = arrangement_from_json(read_file(arr_path));
  const OccupancyLabels labels = obtain_labels(arr, cfg, src);
  const ConvexDecomposition d = decompose_stage(arr, labels, cfg);
  export_decomposition(d, out_path(cfg, "convexes.obj"), DecompositionFormat::Obj);
  export_decomposition(d, out_path(cfg, "convexes.json"), DecompositionFormat::Json);
  if (d.overlap) log_warn("tau > 0 merges added volume; convex parts may overlap");
  write_report(cfg, counts(nullptr, &d, arr.leaves().size()),
               "decompose_report.json", seconds_since(t0));
  return 0;
}

int cmd_evaluate(const Flags& flags, const std::string& recon_path, const std::string& gt_path,
                 bool exact) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg = resolve(flags);
  const SurfaceMesh recon = load_mesh(recon_path);
  const SurfaceMesh gt = load_mesh(gt_path);
  MetricOptions opt;
  opt.threads = cfg.threads;
  opt.exact = exact;
  const SurfaceDistances d = compare_surfaces(recon, gt, cfg.samples, cfg.seed, opt);
  Report r = counts(&recon, nullptr, 0);
  // Reports use units of the ground truth's bounding-box diagonal.
  const double diag = bbox_diagonal(gt.vertices);
  r.cd = d.cd / diag;
  r.hd = d.hd / diag;
  r.nc = d.nc;
  try {
    r.iou = volumetric_iou(recon, gt, cfg.samples, cfg.seed, cfg.threads);
  } catch (const OpenMesh& e) {
    log_warn("IoU skipped: {}", e.what());
  }
  write_report(cfg, r, "report.json", seconds_since(t0));
  return 0;
}

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("bad level '{}'", item));
    }
    if (out.back() < 1) throw ValidationError("levels must be positive");
  }
  if (out.empty()) throw ValidationError("no levels given");
  return out;
}

// Time, memory and cell count per number of input planes, for each method.
int cmd_bench(const Flags& flags, const std::string& fixture_dir, const std::string& levels_s,
              const std::vector<std::string>& methods) {
  const PipelineConfig cfg = resolve(flags);
  const std::vector<int> levels = parse_levels(levels_s);
  int max_level = 0;
  for (int l : levels) max_level = std::max(max_level, l);

  PointCloud cloud;
  std::vector<PlanarPrimitive> prims;
  if (fixture_dir.empty()) {
    SyntheticScene scene = scattered_box_scene((max_level + 5) / 6, cfg.seed);
    cloud = std::move(scene.cloud);
    prims = std::move(scene.primitives);
  } else {
    cloud = load_point_cloud((fs::path(fixture_dir) / "cloud.ply").string());
    prims = load_primitives((fs::path(fixture_dir) / "primitives.json").string(),
                            cloud.points.size());
  }

  std::string csv = "method,planes,cells,time_s,peak_mem_mb\n";
  for (const std::string& m : methods) {
    for (int level : levels) {
      const std::size_t k = std::min<std::size_t>(level, prims.size());
      const std::vector<PlanarPrimitive> sub(prims.begin(), prims.begin() + k);
      reset_peak_heap();
      const auto t0 = std::chrono::steady_clock::now();
      std::size_t cells = 0;
      if (m == "exhaustive") {
        std::vector<PlaneEq> planes;
        for (const auto& p : sub) planes.push_back(p.plane);
        const ConvexCell domain = dilated_bbox(cloud.points, cfg.padding_frac);
        const ToleranceContext tol(bbox_diagonal(cloud.points));
        cells = exhaustive_arrangement(planes, domain, tol).leaves().size();
      } else {
        PipelineConfig c = cfg;
        c.ordering = parse_ordering(m);
        cells = build_arrangement(sub, cloud, c.arrangement()).leaves().size();
      }
      const double t = seconds_since(t0);
      const double mem = static_cast<double>(peak_heap_bytes()) / (1024.0 * 1024.0);
      csv += fmt::format("{},{},{},{:.6f},{:.3f}\n", m, k, cells, t, mem);
    }
  }
  write_file(out_path(cfg, "bench.csv"), csv);
  fmt::print("{}", csv);
  return 0;
}

int cmd_synth(const Flags& flags, const std::string& kind, int boxes) {
  const PipelineConfig cfg = resolve(flags);
  SyntheticScene scene;
  if (kind == "cube") {
    scene = box_union_scene({{Vec3::Zero(), Vec3::Ones()}}, 2000.0, 2000, cfg.seed);
  } else if (kind == "random") {
    scene = random_box_scene(cfg.seed);
  } else if (kind == "l-prism") {
    scene = l_prism_scene(cfg.seed);
  } else if (kind == "scattered") {
    scene = scattered_box_scene(boxes, cfg.seed);
  } else {
    throw ValidationError(fmt::format("unknown fixture kind '{}'", kind));
  }
  save_point_cloud(scene.cloud, out_path(cfg, "cloud.ply"));
  save_primitives(scene.primitives, out_path(cfg, "primitives.json"));
  save_mesh(scene.ground_truth, out_path(cfg, "ground_truth.obj"));
  fmt::print("{} points, {} primitives\n", scene.cloud.points.size(), scene.primitives.size());
  return 0;
}

int cmd_run(const Flags& flags, const std::string& cloud_path, const std::string& prim_path) {
  const PipelineConfig cfg = resolve(flags);
  const PointCloud cloud = load_point_cloud(cloud_path);
  const auto prims = prim_path.empty() ? detect_planes(cloud, cfg.detection)
                                       : load_primitives(prim_path, cloud.points.size());
  std::optional<SurfaceMesh> proxy;
  if (cfg.label_method == LabelMethod::Proxy) proxy = load_mesh(cfg.proxy_path);
  const PipelineResult r = run_pipeline(cloud, prims, cfg, proxy ? &*proxy : nullptr);
  write_file(out_path(cfg, "arrangement.json"), arrangement_to_json(r.arrangement));
  write_file(out_path(cfg, "labels.json"), labels_to_json(r.arrangement, r.labels));
  save_mesh(r.surface.raw, out_path(cfg, "surface.obj"));
  if (cfg.remesh) save_mesh(r.surface.remeshed, out_path(cfg, "surface_remeshed.obj"));
  export_decomposition(r.decomposition, out_path(cfg, "convexes.obj"), DecompositionFormat::Obj);
  export_decomposition(r.decomposition, out_path(cfg, "convexes.json"),
                       DecompositionFormat::Json);
  write_file(out_path(cfg, "report.json"), report_to_json(r.report));
  fmt::print("{}", report_table(r.report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compod: plane arrangements, polygon surfaces and convex decompositions"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "TOML configuration file");
  app.add_option("--ordering", f.ordering, "dynamic, product-only or area-desc");
  app.add_option("--basis", f.basis, "points, hull-vertices or hull-sampled=N");
  app.add_option("--padding", f.padding, "bounding-box padding, fraction of the diagonal");
  app.add_option("--label", f.label, "normal or proxy=<mesh>");
  app.add_option("--lambda", f.lambda, "smoothness weight");
  app.add_option("--tau", f.tau, "merge volume threshold; absolute, or N% of the inside volume");
  app.add_flag("--no-remesh", f.no_remesh, "skip facet aggregation");
  app.add_flag("--no-cell-merge", f.no_cell_merge, "skip sibling merging");
  app.add_option("--samples", f.samples, "evaluation sample count");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--threads", f.threads, "worker threads");
  app.add_option("--out", f.out, "output directory");
  app.add_flag("--timing", f.timing, "record wall time and peak memory in reports");

  std::string cloud, prims, arr, recon, gt, fixtures, kind = "cube";
  std::string levels = "10,20,50,100";
  std::vector<std::string> methods{"dynamic", "exhaustive"};
  int boxes = 10;
  bool exact = false;
  LabelSource src;

  auto* detect = app.add_subcommand("detect", "detect planar primitives in a point cloud");
  detect->add_option("cloud", cloud, "PLY point cloud")->required();

  auto* partition = app.add_subcommand("partition", "build the plane arrangement");
  partition->add_option("primitives", prims, "primitives JSON")->required();
  partition->add_option("--cloud", cloud, "PLY point cloud")->required();

  auto add_labels = [&](CLI::App* sub) {
    sub->add_option("arrangement", arr, "arrangement JSON")->required();
    sub->add_option("--labels", src.labels_json, "labels JSON from a previous run");
    sub->add_option("--primitives", src.primitives, "primitives JSON, for normal labelling");
    sub->add_option("--cloud", src.cloud, "PLY point cloud, for normal labelling");
  };
  auto* surface = app.add_subcommand("surface", "extract the polygon surface");
  add_labels(surface);
  auto* decompose = app.add_subcommand("decompose", "extract a convex decomposition");
  add_labels(decompose);

  auto* evaluate = app.add_subcommand("evaluate", "compare a reconstruction to ground truth");
  evaluate->add_option("reconstruction", recon, "reconstructed mesh")->required();
  evaluate->add_option("ground_truth", gt, "ground-truth mesh")->required();
  evaluate->add_flag("--exact", exact, "point-to-triangle distances");

  auto* bench = app.add_subcommand("bench", "time construction against the plane count");
  bench->add_option("--fixtures", fixtures, "directory with cloud.ply and primitives.json");
  bench->add_option("--levels", levels, "comma-separated plane counts");
  bench->add_option("--methods", methods, "dynamic, product-only, area-desc, exhaustive");

  auto* synth = app.add_subcommand("synth", "write a synthetic fixture");
  synth->add_option("--kind", kind, "cube, random, l-prism or scattered");
  synth->add_option("--boxes", boxes, "box count for scattered scenes");

  auto* run = app.add_subcommand("run", "every stage in one go");
  run->add_option("cloud", cloud, "PLY point cloud")->required();
  run->add_option("--primitives", prims, "primitives JSON; detected when omitted");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*detect) return cmd_detect(f, cloud);
    if (*partition) return cmd_partition(f, prims, cloud);
    if (*surface) return cmd_surface(f, arr, src);
    if (*decompose) return cmd_decompose(f, arr, src);
    if (*evaluate) return cmd_evaluate(f, recon, gt, exact);
    if (*bench) return cmd_bench(f, fixtures, levels, methods);
    if (*synth) return cmd_synth(f, kind, boxes);
    if (*run) return cmd_run(f, cloud, prims);
  } catch (const IoError& e) {
    log_error("{}", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    log_error("{}", e.what());
    return kExitIo;
  } catch (const Error& e) {
    log_error("{}", e.what());
    return kExitValidation;
  }
  return 0;
}
