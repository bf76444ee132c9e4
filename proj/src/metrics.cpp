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

#include "compod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include <fmt/format.h>

#include "compod/bvh.hpp"
#include "compod/error.hpp"
#include "compod/kdtree.hpp"
#include "compod/parallel.hpp"

namespace compod {

namespace {

struct Directed {
  std::vector<double> dist;   // per sample of the source set
  std::vector<double> align;  // |n . n_nearest|
};

Directed directed(const SampleSet& from, const SampleSet& to, const SurfaceMesh& to_mesh,
                  const MetricOptions& opt) {
  Directed d;
  const std::size_t n = from.points.size();
  d.dist.resize(n);
  d.align.resize(n);
  KdTree tree;
  TriangleBvh bvh;
  if (opt.exact) {
    bvh = TriangleBvh(to_mesh);
  } else {
    tree = KdTree(to.points);
  }
  parallel_for(n, opt.threads, [&](std::size_t i) {
    if (opt.exact) {
      const TriangleBvh::Hit h = bvh.nearest(from.points[i]);
      d.dist[i] = h.distance;
      d.align[i] = std::abs(from.normals[i].dot(h.normal));
    } else {
      const auto [j, d2] = tree.nearest(from.points[i]);
      d.dist[i] = std::sqrt(d2);
      d.align[i] = std::abs(from.normals[i].dot(to.normals[j]));
    }
  });
  return d;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

struct Box3 {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  void add(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

void require_closed(const SurfaceMesh& m, const char* what) {
  if (m.empty()) throw EmptyMesh(fmt::format("{} mesh is empty", what));
  const MeshAudit a = audit_mesh(m);
  if (!a.watertight()) {
    throw OpenMesh(fmt::format("{} mesh is not closed ({} boundary, {} non-manifold edges)",
                               what, a.boundary_edges, a.nonmanifold_edges));
  }
}

template <typename InA, typename InB>
double monte_carlo_iou(const Box3& box, std::size_t n, std::uint64_t seed, int threads,
                       InA&& in_a, InB&& in_b) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> probes(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 ext = box.hi - box.lo;
  for (auto& p : probes) {
    const double x = u(rng), y = u(rng), z = u(rng);
    p = box.lo + Vec3(x * ext.x(), y * ext.y(), z * ext.z());
  }
  std::vector<unsigned char> state(n);
  parallel_for(n, threads, [&](std::size_t i) {
    state[i] = static_cast<unsigned char>((in_a(probes[i]) ? 1 : 0) | (in_b(probes[i]) ? 2 : 0));
  });
  std::size_t inter = 0, uni = 0;
  for (unsigned char s : state) {
    if (s == 3) ++inter;
    if (s != 0) ++uni;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string num(double x) {
  if (std::isnan(x)) return "null";
  return fmt::format("{:.17g}", x);
}

}  // namespace

SampleSet sample_surface(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw EmptyMesh("cannot sample an empty mesh");
  if (n == 0) throw ValidationError("sample count must be positive");
  std::vector<int> src;
  const auto tris = triangulate(mesh, &src);
  std::vector<double> cum(tris.size());
  double total = 0.0;
  std::vector<Vec3> normals(mesh.facets.size());
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) normals[f] = mesh.facet_normal(f);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const Vec3& a = mesh.vertices[tris[t][0]];
    total += 0.5 * (mesh.vertices[tris[t][1]] - a).cross(mesh.vertices[tris[t][2]] - a).norm();
    cum[t] = total;
  }
  if (!(total > 0.0)) throw EmptyMesh("mesh has zero area");
  SampleSet s;
  s.seed = seed;
  s.points.reserve(n);
  s.normals.reserve(n);
  s.facets.reserve(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = u(rng) * total;
    const std::size_t t = std::min<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin(), tris.size() - 1);
    const double r1 = std::sqrt(u(rng)), r2 = u(rng);
    const Vec3& a = mesh.vertices[tris[t][0]];
    const Vec3& b = mesh.vertices[tris[t][1]];
    const Vec3& c = mesh.vertices[tris[t][2]];
    s.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    s.normals.push_back(normals[src[t]]);
    s.facets.push_back(src[t]);
  }
  return s;
}

SurfaceDistances compare_surfaces(const SurfaceMesh& a, const SurfaceMesh& b,
                                  std::size_t n, std::uint64_t seed,
                                  const MetricOptions& opt) {
  const SampleSet sa = sample_surface(a, n, seed);
  const SampleSet sb = sample_surface(b, n, seed);
  const Directed ab = directed(sa, sb, b, opt);
  const Directed ba = directed(sb, sa, a, opt);
  SurfaceDistances r;
  r.cd = 0.5 * mean(ab.dist) + 0.5 * mean(ba.dist);
  r.hd = std::max(max_of(ab.dist), max_of(ba.dist));
  r.nc = 0.5 * mean(ab.align) + 0.5 * mean(ba.align);
  return r;
}

double chamfer(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
               std::uint64_t seed, const MetricOptions& opt) {
  return compare_surfaces(a, b, n, seed, opt).cd;
}

double hausdorff(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
                 std::uint64_t seed, const MetricOptions& opt) {
  return compare_surfaces(a, b, n, seed, opt).hd;
}

double normal_consistency(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
                          std::uint64_t seed, const MetricOptions& opt) {
  return compare_surfaces(a, b, n, seed, opt).nc;
}

double volumetric_iou(const ConvexDecomposition& a, const SurfaceMesh& b, std::size_t n,
                      std::uint64_t seed, int threads) {
  require_closed(b, "reference");
  Box3 box;
  std::vector<Box3> cell_boxes(a.cells.size());
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    for (const Vec3& v : a.cells[c].vertices()) {
      cell_boxes[c].add(v);
      box.add(v);
    }
  }
  for (const Vec3& v : b.vertices) box.add(v);
  const InsideTester tb(b);
  auto in_a = [&](const Vec3& p) {
    for (std::size_t c = 0; c < a.cells.size(); ++c) {
      if (cell_boxes[c].contains(p) && a.cells[c].contains(p, 0.0)) return true;
    }
    return false;
  };
  return monte_carlo_iou(box, n, seed, threads, in_a,
                         [&](const Vec3& p) { return tb.inside(p); });
}

double volumetric_iou(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
                      std::uint64_t seed, int threads) {
  require_closed(a, "reconstructed");
  require_closed(b, "reference");
  Box3 box;
  for (const Vec3& v : a.vertices) box.add(v);
  for (const Vec3& v : b.vertices) box.add(v);
  const InsideTester ta(a), tb(b);
  return monte_carlo_iou(box, n, seed, threads, [&](const Vec3& p) { return ta.inside(p); },
                         [&](const Vec3& p) { return tb.inside(p); });
}

Report complexity_report(const SurfaceMesh* surface, const ConvexDecomposition* decomp,
                         std::size_t cells, double time_s, double peak_mem_mb) {
  Report r;
  r.cells = cells;
  r.surface_facets = surface ? surface->facets.size() : 0;
  r.volume_cells = decomp ? decomp->cells.size() : 0;
  r.volume_facets = decomp ? decomp->facet_count() : 0;
  r.time_s = time_s;
  r.peak_mem_mb = peak_mem_mb;
  return r;
}

std::string report_to_json(const Report& r) {
  return fmt::format(
      "{{\n \"cells\": {},\n \"surface_facets\": {},\n \"volume_cells\": {},\n"
      " \"volume_facets\": {},\n \"cd\": {},\n \"hd\": {},\n \"nc\": {},\n \"iou\": {},\n"
      " \"time_s\": {},\n \"peak_mem_mb\": {},\n \"seed\": {},\n \"config_hash\": \"{}\"\n}}\n",
      r.cells, r.surface_facets, r.volume_cells, r.volume_facets, num(r.cd), num(r.hd),
      num(r.nc), num(r.iou), num(r.time_s), num(r.peak_mem_mb), r.seed, r.config_hash);
}

Report report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("report: {}", e.what()), e.byte);
  }
  auto real = [&](const char* k) {
    const auto& v = j.at(k);
    return v.is_null() ? Report::kUnset : v.get<double>();
  };
  Report r;
  try {
    r.cells = j.at("cells").get<std::size_t>();
    r.surface_facets = j.at("surface_facets").get<std::size_t>();
    r.volume_cells = j.at("volume_cells").get<std::size_t>();
    r.volume_facets = j.at("volume_facets").get<std::size_t>();
    r.cd = real("cd");
    r.hd = real("hd");
    r.nc = real("nc");
    r.iou = real("iou");
    r.time_s = real("time_s");
    r.peak_mem_mb = real("peak_mem_mb");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("report: {}", e.what()), 0);
  }
  return r;
}

std::string report_table(const Report& r) {
  auto opt = [](double x) { return std::isnan(x) ? std::string("-") : fmt::format("{:.6g}", x); };
  std::string s;
  auto row = [&](const char* k, const std::string& v) { s += fmt::format("{:<16}{:>16}\n", k, v); };
  row("cells", std::to_string(r.cells));
  row("surface_facets", std::to_string(r.surface_facets));
  row("volume_cells", std::to_string(r.volume_cells));
  row("volume_facets", std::to_string(r.volume_facets));
  row("cd", opt(r.cd));
  row("hd", opt(r.hd));
  row("nc", opt(r.nc));
  row("iou", opt(r.iou));
  row("time_s", opt(r.time_s));
  row("peak_mem_mb", opt(r.peak_mem_mb));
  row("seed", std::to_string(r.seed));
  row("config_hash", r.config_hash);
  return s;
}

}  // namespace compod
