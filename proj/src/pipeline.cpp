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

#include "compod/pipeline.hpp"

#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <cmath>

#include "compod/error.hpp"
#include "compod/log.hpp"
#include "compod/memory.hpp"

namespace compod {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment, ignoring '#' inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ValidationError(fmt::format("{}: expected a number, got '{}'", key, v));
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ValidationError(fmt::format("{}: expected an integer, got '{}'", key, v));
  }
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long n = to_int(key, v);
  if (n < 0) throw ValidationError(fmt::format("{}: must not be negative", key));
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValidationError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

const char* ordering_name(Ordering o) {
  switch (o) {
    case Ordering::Dynamic: return "dynamic";
    case Ordering::ProductOnly: return "product-only";
    case Ordering::AreaDesc: return "area-desc";
  }
  return "?";
}

const char* basis_name(Basis b) {
  switch (b) {
    case Basis::InlierPoints: return "points";
    case Basis::HullVertices: return "hull-vertices";
    case Basis::HullSampled: return "hull-sampled";
  }
  return "?";
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void PipelineConfig::validate() const {
  detection.validate();
  label_config().validate();
  if (!(padding_frac >= 0.0) || !std::isfinite(padding_frac)) {
    throw ValidationError("padding must be a non-negative number");
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be >= 0");
  if (basis == Basis::HullSampled && hull_samples == 0) {
    throw ValidationError("hull-sampled needs a positive sample count");
  }
  if (samples == 0) throw ValidationError("samples must be positive");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (label_method == LabelMethod::Proxy && proxy_path.empty()) {
    throw ValidationError("proxy labelling needs a mesh path");
  }
}

ArrangementConfig PipelineConfig::arrangement() const {
  ArrangementConfig a;
  a.ordering = ordering;
  a.basis = basis;
  a.hull_samples = hull_samples;
  a.seed = seed;
  a.padding_frac = padding_frac;
  return a;
}

LabelConfig PipelineConfig::label_config() const {
  LabelConfig l = labelling;
  l.seed = seed;
  l.threads = threads;
  return l;
}

std::map<std::string, std::string> parse_toml(const std::string& text) {
  std::map<std::string, std::string> out;
  std::string table;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string raw =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError(fmt::format("config line {}: bad table header", line_no), line_no);
      }
      table = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(fmt::format("config line {}: expected key = value", line_no), line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(fmt::format("config line {}: empty key or value", line_no), line_no);
    }
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ParseError(fmt::format("config line {}: unterminated string", line_no), line_no);
      }
      value = value.substr(1, value.size() - 2);
    }
    const std::string full = table.empty() ? key : table + "." + key;
    if (!out.emplace(full, value).second) {
      throw ParseError(fmt::format("config line {}: duplicate key {}", line_no, full), line_no);
    }
  }
  return out;
}

void apply_toml(PipelineConfig& cfg, const std::string& text) {
  for (const auto& [key, v] : parse_toml(text)) {
    if (key == "detection.fit_tol_frac") cfg.detection.fit_tol_frac = to_double(key, v);
    else if (key == "detection.min_inliers") cfg.detection.min_inliers = static_cast<int>(to_int(key, v));
    else if (key == "detection.knn") cfg.detection.knn = static_cast<int>(to_int(key, v));
    else if (key == "detection.max_angle_deg") cfg.detection.max_angle_deg = to_double(key, v);
    else if (key == "arrangement.ordering") cfg.ordering = parse_ordering(v);
    else if (key == "arrangement.basis") parse_basis(v, cfg);
    else if (key == "arrangement.padding") cfg.padding_frac = to_double(key, v);
    else if (key == "labelling.method") parse_label(v, cfg);
    else if (key == "labelling.lambda") cfg.labelling.lambda = to_double(key, v);
    else if (key == "labelling.vote_radius_frac") cfg.labelling.vote_radius_frac = to_double(key, v);
    else if (key == "labelling.proxy_samples_per_cell") cfg.labelling.proxy_samples_per_cell = static_cast<int>(to_int(key, v));
    else if (key == "decomposition.tau") parse_tau(v, cfg);
    else if (key == "decomposition.cell_merge") cfg.cell_merge = to_bool(key, v);
    else if (key == "surface.remesh") cfg.remesh = to_bool(key, v);
    else if (key == "evaluation.samples") cfg.samples = to_count(key, v);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_count(key, v));
    else if (key == "threads") cfg.threads = static_cast<int>(to_int(key, v));
    else if (key == "out") cfg.out_dir = v;
    else throw ParseError(fmt::format("unknown config key {}", key), 0);
  }
}

std::string canonical_config(const PipelineConfig& cfg) {
  const LabelConfig l = cfg.label_config();
  return fmt::format(
      "detection.fit_tol_frac={:.17g}\ndetection.min_inliers={}\ndetection.knn={}\n"
      "detection.max_angle_deg={:.17g}\narrangement.ordering={}\narrangement.basis={}\n"
      "arrangement.hull_samples={}\narrangement.padding={:.17g}\nlabelling.method={}\n"
      "labelling.proxy={}\nlabelling.lambda={:.17g}\nlabelling.vote_radius_frac={:.17g}\n"
      "labelling.proxy_samples_per_cell={}\ndecomposition.tau={:.17g}\n"
      "decomposition.tau_is_fraction={}\ndecomposition.cell_merge={}\nsurface.remesh={}\n"
      "evaluation.samples={}\nseed={}\n",
      cfg.detection.fit_tol_frac, cfg.detection.min_inliers, cfg.detection.knn,
      cfg.detection.max_angle_deg, ordering_name(cfg.ordering), basis_name(cfg.basis),
      cfg.basis == Basis::HullSampled ? cfg.hull_samples : 0, cfg.padding_frac,
      cfg.label_method == LabelMethod::Normal ? "normal" : "proxy",
      cfg.label_method == LabelMethod::Proxy ? cfg.proxy_path : "", l.lambda,
      l.vote_radius_frac, l.proxy_samples_per_cell, cfg.tau, cfg.tau_is_fraction,
      cfg.cell_merge, cfg.remesh, cfg.samples, cfg.seed);
}

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

Ordering parse_ordering(const std::string& s) {
  if (s == "dynamic") return Ordering::Dynamic;
  if (s == "product-only") return Ordering::ProductOnly;
  if (s == "area-desc") return Ordering::AreaDesc;
  throw ValidationError(fmt::format("unknown ordering '{}'", s));
}

void parse_basis(const std::string& s, PipelineConfig& cfg) {
  if (s == "points") {
    cfg.basis = Basis::InlierPoints;
  } else if (s == "hull-vertices") {
    cfg.basis = Basis::HullVertices;
  } else if (s == "hull-sampled") {
    cfg.basis = Basis::HullSampled;
  } else if (s.rfind("hull-sampled=", 0) == 0) {
    cfg.basis = Basis::HullSampled;
    cfg.hull_samples = to_count("basis", s.substr(13));
  } else {
    throw ValidationError(fmt::format("unknown basis '{}'", s));
  }
}

void parse_label(const std::string& s, PipelineConfig& cfg) {
  if (s == "normal") {
    cfg.label_method = LabelMethod::Normal;
    cfg.proxy_path.clear();
  } else if (s.rfind("proxy=", 0) == 0 && s.size() > 6) {
    cfg.label_method = LabelMethod::Proxy;
    cfg.proxy_path = s.substr(6);
  } else {
    throw ValidationError(fmt::format("unknown labelling '{}'", s));
  }
}

void parse_tau(const std::string& s, PipelineConfig& cfg) {
  if (!s.empty() && s.back() == '%') {
    cfg.tau = to_double("tau", s.substr(0, s.size() - 1)) / 100.0;
    cfg.tau_is_fraction = true;
  } else {
    cfg.tau = to_double("tau", s);
    cfg.tau_is_fraction = false;
  }
  if (cfg.tau < 0.0) throw ValidationError("tau must be >= 0");
}

OccupancyLabels label_arrangement(const Arrangement& arr, const PipelineConfig& cfg,
                                  const LabelInputs& in) {
  if (cfg.label_method == LabelMethod::Proxy) {
    if (in.proxy == nullptr) throw ValidationError("proxy labelling needs a proxy mesh");
    return label_cells_proxy(arr, *in.proxy, cfg.label_config());
  }
  if (in.primitives == nullptr || in.cloud == nullptr) {
    throw ValidationError("normal labelling needs the primitives and the point cloud");
  }
  return label_cells_normal(arr, *in.primitives, *in.cloud, cfg.label_config());
}

SurfaceOutput surface_stage(const Arrangement& arr, const OccupancyLabels& labels,
                            const PipelineConfig& cfg) {
  SurfaceOutput out;
  out.raw = extract_surface(arr, labels);
  out.remeshed = cfg.remesh ? aggregate_facets(out.raw, arr.tol) : out.raw;
  return out;
}

ConvexDecomposition decompose_stage(const Arrangement& arr, const OccupancyLabels& labels,
                                    const PipelineConfig& cfg) {
  std::vector<MergedCell> cells;
  if (cfg.cell_merge) {
    cells = merge_siblings(arr, labels);
  } else {
    for (int leaf : arr.leaves()) cells.push_back({leaf, labels.at(leaf), {leaf}});
  }
  double tau = cfg.tau;
  if (cfg.tau_is_fraction) {
    double inside = 0.0;
    for (const MergedCell& c : cells) {
      if (c.label == Label::Inside) inside += arr.nodes[c.node].cell.volume();
    }
    tau *= inside;
  }
  return simplify_cells(arr, cells, tau);
}

PipelineResult run_pipeline(const PointCloud& cloud,
                            const std::vector<PlanarPrimitive>& primitives,
                            const PipelineConfig& cfg, const SurfaceMesh* proxy) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  reset_peak_heap();
  PipelineResult r;
  r.arrangement = build_arrangement(primitives, cloud, cfg.arrangement());
  r.labels = label_arrangement(r.arrangement, cfg, {&primitives, &cloud, proxy});
  r.surface = surface_stage(r.arrangement, r.labels, cfg);
  r.decomposition = decompose_stage(r.arrangement, r.labels, cfg);
  const double wall = elapsed(t0);
  const double mem = static_cast<double>(peak_heap_bytes()) / (1024.0 * 1024.0);
  r.report = complexity_report(&r.surface.remeshed, &r.decomposition,
                               r.arrangement.leaves().size(), cfg.timing ? wall : Report::kUnset,
                               cfg.timing ? mem : Report::kUnset);
  r.report.seed = cfg.seed;
  r.report.config_hash = config_hash(cfg);
  log_info("pipeline: {} cells, {} surface facets, {} convex parts in {:.3f} s",
           r.report.cells, r.report.surface_facets, r.report.volume_cells, wall);
  return r;
}

}  // namespace compod
