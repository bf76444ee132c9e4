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

#include "compod/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "compod/cdt.hpp"
#include "compod/error.hpp"
#include "compod/hull.hpp"
#include "compod/io.hpp"
#include "compod/log.hpp"
#include "compod/union_find.hpp"

namespace compod {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey undirected(int u, int v) { return u < v ? EdgeKey{u, v} : EdgeKey{v, u}; }

// Result of remeshing one cluster: replacement facets, or nothing to keep
// the originals.
struct ClusterResult {
  bool replaced = false;
  std::vector<MeshFacet> facets;
};

ClusterResult remesh_cluster(const SurfaceMesh& mesh, const std::vector<int>& members) {
  ClusterResult res;
  std::map<EdgeKey, int> uses;
  for (int f : members) {
    const auto& loop = mesh.facets[f].loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      ++uses[undirected(loop[i], loop[(i + 1) % loop.size()])];
    }
  }
  std::map<int, std::vector<int>> next;  // boundary half-edges u -> v
  for (int f : members) {
    const auto& loop = mesh.facets[f].loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int u = loop[i], v = loop[(i + 1) % loop.size()];
      if (uses[undirected(u, v)] == 1) next[u].push_back(v);
    }
  }
  for (const auto& [v, outs] : next) {
    if (outs.size() != 1) {
      log_warn("coplanar cluster of {} facets is pinched at vertex {}; left as is",
               members.size(), v);
      return res;
    }
  }
  // Walk the cycles.
  std::vector<std::vector<int>> cycles;
  std::set<int> visited;
  for (const auto& [start, outs] : next) {
    if (visited.count(start)) continue;
    std::vector<int> cyc;
    int v = start;
    while (!visited.count(v)) {
      visited.insert(v);
      cyc.push_back(v);
      v = next.at(v).front();
    }
    if (v != start) {
      log_warn("open boundary walk in coplanar cluster; left as is");
      return res;
    }
    cycles.push_back(std::move(cyc));
  }
  const Vec3 normal = mesh.facet_normal(members.front());
  const PlaneEq plane = PlaneEq::from_point_normal(mesh.vertices[mesh.facets[members.front()].loop[0]], normal);
  const PlaneFrame frame(plane);
  std::vector<std::vector<Vec2>> loops2d;
  int outer = -1;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    std::vector<Vec2> l;
    for (int v : cycles[c]) l.push_back(frame.to_2d(mesh.vertices[v]));
    if (signed_area_2d(l) > 0.0) {
      if (outer >= 0) {
        log_warn("coplanar cluster with several outer cycles; left as is");
        return res;
      }
      outer = static_cast<int>(c);
    }
    loops2d.push_back(std::move(l));
  }
  if (outer < 0) return res;
  const int source = mesh.facets[members.front()].source;
  if (cycles.size() == 1) {
    res.replaced = true;
    res.facets.push_back({cycles[0], source});
    return res;
  }
  std::vector<std::vector<Vec2>> holes;
  std::vector<int> ids = cycles[outer];
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    if (static_cast<int>(c) == outer) continue;
    holes.push_back(loops2d[c]);
    ids.insert(ids.end(), cycles[c].begin(), cycles[c].end());
  }
  std::vector<Triangle> tris;
  try {
    tris = constrained_delaunay_2d(loops2d[outer], holes);
  } catch (const InvalidLoops& e) {
    log_warn("holed cluster could not be triangulated ({}); left as is", e.what());
    return res;
  }
  res.replaced = true;
  for (const Triangle& t : tris) {
    res.facets.push_back({{ids[t[0]], ids[t[1]], ids[t[2]]}, source});
  }
  return res;
}

// Drops vertices that only two edges of the whole mesh touch and that lie on
// the segment between their neighbours; they are leftovers of merged facets.
void drop_straight_vertices(SurfaceMesh& mesh, double eps) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::set<int>> nbrs(mesh.vertices.size());
    for (const auto& f : mesh.facets) {
      for (std::size_t i = 0; i < f.loop.size(); ++i) {
        const int u = f.loop[i], v = f.loop[(i + 1) % f.loop.size()];
        nbrs[u].insert(v);
        nbrs[v].insert(u);
      }
    }
    std::vector<char> drop(mesh.vertices.size(), 0);
    for (std::size_t v = 0; v < nbrs.size(); ++v) {
      if (nbrs[v].size() != 2) continue;
      const Vec3& a = mesh.vertices[*nbrs[v].begin()];
      const Vec3& b = mesh.vertices[*nbrs[v].rbegin()];
      if (point_segment_distance(mesh.vertices[v], a, b) <= eps) drop[v] = 1;
    }
    for (auto& f : mesh.facets) {
      std::vector<int> kept;
      for (int v : f.loop) {
        if (!drop[v]) kept.push_back(v);
      }
      if (kept.size() >= 3 && kept.size() != f.loop.size()) {
        f.loop = std::move(kept);
        changed = true;
      }
    }
  }
}

std::vector<int> subtree_leaves(const Arrangement& arr, int node) {
  std::vector<int> out, stack{node};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    if (arr.nodes[n].is_leaf()) {
      out.push_back(n);
    } else {
      stack.push_back(arr.nodes[n].children[1]);
      stack.push_back(arr.nodes[n].children[0]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SurfaceMesh extract_surface(const Arrangement& arr, const OccupancyLabels& labels) {
  std::vector<std::pair<std::vector<Vec3>, int>> polys;
  for (int e : arr.graph.live_edges()) {
    const GraphEdge& ge = arr.graph.edge(e);
    const Label la = labels.by_node.at(ge.a), lb = labels.by_node.at(ge.b);
    if (la == Label::Unknown || lb == Label::Unknown) {
      throw ValidationError(fmt::format("leaf {} is unlabelled",
                                        la == Label::Unknown ? ge.a : ge.b));
    }
    if (la == lb) continue;
    std::vector<Vec3> poly = ge.polygon;
    if (la != Label::Inside) std::reverse(poly.begin(), poly.end());
    polys.emplace_back(std::move(poly), ge.source);
  }
  for (int l : arr.leaves()) {
    if (labels.by_node[l] != Label::Inside) continue;
    const ConvexCell& cell = arr.nodes[l].cell;
    for (std::size_t f = 0; f < cell.facets().size(); ++f) {
      const int source = cell.halfspaces()[cell.facets()[f].halfspace].source;
      if (is_box_source(source)) polys.emplace_back(cell.facet_polygon(f), source);
    }
  }
  if (polys.empty()) {
    log_warn("no inside/outside interface; the surface is empty");
    return {};
  }
  return split_nonmanifold(build_conforming_mesh(polys, arr.tol.eps_abs()));
}

SurfaceMesh aggregate_facets(const SurfaceMesh& mesh, const ToleranceContext& tol) {
  const std::size_t nf = mesh.facets.size();
  std::map<EdgeKey, std::vector<int>> incidence;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& loop = mesh.facets[f].loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      incidence[undirected(loop[i], loop[(i + 1) % loop.size()])].push_back(static_cast<int>(f));
    }
  }
  UnionFind uf(nf);
  for (const auto& [key, fs] : incidence) {
    if (fs.size() != 2) continue;
    const int s = mesh.facets[fs[0]].source;
    if (s != kNoSource && s == mesh.facets[fs[1]].source) uf.unite(fs[0], fs[1]);
  }
  std::map<int, std::vector<int>> clusters;
  for (std::size_t f = 0; f < nf; ++f) clusters[uf.find(static_cast<int>(f))].push_back(static_cast<int>(f));

  SurfaceMesh out;
  out.vertices = mesh.vertices;
  // Emit in order of each cluster's first facet to keep output stable.
  for (const auto& [root, members] : clusters) {
    if (members.size() > 1) {
      ClusterResult r = remesh_cluster(mesh, members);
      if (r.replaced) {
        for (auto& f : r.facets) out.facets.push_back(std::move(f));
        continue;
      }
    }
    for (int f : members) out.facets.push_back(mesh.facets[f]);
  }
  drop_straight_vertices(out, tol.eps_abs());
  return out;
}

std::vector<MergedCell> merge_siblings(const Arrangement& arr,
                                       const OccupancyLabels& labels) {
  const int n = static_cast<int>(arr.nodes.size());
  // Uniform label of each subtree, Unknown when mixed. Children always have
  // larger ids than their parent.
  std::vector<Label> uniform(n, Label::Unknown);
  for (int i = n - 1; i >= 0; --i) {
    const BspNode& node = arr.nodes[i];
    if (node.is_leaf()) {
      uniform[i] = labels.by_node.at(i);
    } else {
      const Label a = uniform[node.children[0]], b = uniform[node.children[1]];
      uniform[i] = (a == b) ? a : Label::Unknown;
    }
  }
  std::vector<MergedCell> out;
  for (int i = 0; i < n; ++i) {
    if (uniform[i] == Label::Unknown) continue;
    const int p = arr.nodes[i].parent;
    if (p >= 0 && uniform[p] != Label::Unknown) continue;
    out.push_back({i, uniform[i], subtree_leaves(arr, i)});
  }
  return out;
}

std::size_t ConvexDecomposition::facet_count() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.facets().size();
  return n;
}

double ConvexDecomposition::volume() const {
  double v = 0.0;
  for (const auto& c : cells) v += c.volume();
  return v;
}

int ConvexDecomposition::containing(const Vec3& p, double eps) const {
  int k = 0;
  for (const auto& c : cells) {
    if (c.contains(p, -eps)) ++k;
  }
  return k;
}

ConvexDecomposition simplify_cells(std::vector<ConvexCell> cells,
                                   std::vector<std::vector<int>> provenance,
                                   std::span<const std::pair<int, int>> adjacency,
                                   double tau, const ToleranceContext& tol) {
  if (!(tau >= 0.0)) throw ValidationError(fmt::format("tau must be >= 0, got {}", tau));
  provenance.resize(cells.size());
  double total = 0.0;
  for (const auto& c : cells) total += c.volume();
  const double eps_vol = 1e-9 * total;
  const double threshold = std::max(tau, eps_vol);

  std::vector<std::set<int>> nbrs(cells.size());
  for (const auto& [a, b] : adjacency) {
    if (a == b) continue;
    nbrs.at(a).insert(b);
    nbrs.at(b).insert(a);
  }
  std::vector<char> alive(cells.size(), 1);

  struct Candidate {
    double defect;
    int a, b;
    bool operator>(const Candidate& o) const {
      if (defect != o.defect) return defect > o.defect;
      if (a != o.a) return a > o.a;
      return b > o.b;
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;
  auto union_points = [&](int a, int b) {
    std::vector<Vec3> pts = cells[a].vertices();
    pts.insert(pts.end(), cells[b].vertices().begin(), cells[b].vertices().end());
    return pts;
  };
  auto push_pair = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const ConvexCell hull = convex_hull_3d(union_points(a, b), tol);
    const double defect = std::abs(cells[a].volume() + cells[b].volume() - hull.volume());
    if (defect < threshold) queue.push({defect, a, b});
  };
  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (int b : nbrs[a]) {
      if (static_cast<int>(a) < b) push_pair(static_cast<int>(a), b);
    }
  }
  bool overlap = false;
  while (!queue.empty()) {
    const Candidate c = queue.top();
    queue.pop();
    if (!alive[c.a] || !alive[c.b]) continue;
    ConvexCell merged = convex_hull_3d(union_points(c.a, c.b), tol);
    if (c.defect >= eps_vol) overlap = true;
    const int id = static_cast<int>(cells.size());
    cells.push_back(std::move(merged));
    std::vector<int> prov = provenance[c.a];
    prov.insert(prov.end(), provenance[c.b].begin(), provenance[c.b].end());
    std::sort(prov.begin(), prov.end());
    provenance.push_back(std::move(prov));
    alive[c.a] = alive[c.b] = 0;
    alive.push_back(1);
    std::set<int> joined;
    for (int x : nbrs[c.a]) joined.insert(x);
    for (int x : nbrs[c.b]) joined.insert(x);
    joined.erase(c.a);
    joined.erase(c.b);
    nbrs.emplace_back();
    for (int x : joined) {
      if (!alive[x]) continue;
      nbrs[x].erase(c.a);
      nbrs[x].erase(c.b);
      nbrs[x].insert(id);
      nbrs[id].insert(x);
    }
    nbrs[c.a].clear();
    nbrs[c.b].clear();
    for (int x : nbrs[id]) push_pair(x, id);
  }
  ConvexDecomposition out;
  out.overlap = overlap;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!alive[i]) continue;
    out.cells.push_back(std::move(cells[i]));
    out.provenance.push_back(std::move(provenance[i]));
  }
  return out;
}

ConvexDecomposition simplify_cells(const Arrangement& arr,
                                   std::span<const MergedCell> cells, double tau) {
  std::vector<ConvexCell> geo;
  std::vector<std::vector<int>> prov;
  std::unordered_map<int, int> owner;  // leaf -> index into geo
  for (const MergedCell& m : cells) {
    if (m.label != Label::Inside) continue;
    for (int l : m.leaves) owner[l] = static_cast<int>(geo.size());
    geo.push_back(arr.nodes[m.node].cell);
    prov.push_back(m.leaves);
  }
  std::set<std::pair<int, int>> adj;
  for (int e : arr.graph.live_edges()) {
    const GraphEdge& ge = arr.graph.edge(e);
    auto ia = owner.find(ge.a), ib = owner.find(ge.b);
    if (ia == owner.end() || ib == owner.end() || ia->second == ib->second) continue;
    adj.insert({std::min(ia->second, ib->second), std::max(ia->second, ib->second)});
  }
  const std::vector<std::pair<int, int>> pairs(adj.begin(), adj.end());
  return simplify_cells(std::move(geo), std::move(prov), pairs, tau, arr.tol);
}

std::string decomposition_to_obj(const ConvexDecomposition& decomp) {
  std::string s = "# compod convex decomposition\n";
  std::size_t base = 1;
  for (std::size_t c = 0; c < decomp.cells.size(); ++c) {
    const ConvexCell& cell = decomp.cells[c];
    s += fmt::format("g convex_{}\n", c);
    for (const Vec3& v : cell.vertices()) {
      s += fmt::format("v {:.17g} {:.17g} {:.17g}\n", v.x(), v.y(), v.z());
    }
    for (const CellFacet& f : cell.facets()) {
      for (std::size_t i = 1; i + 1 < f.loop.size(); ++i) {
        s += fmt::format("f {} {} {}\n", base + f.loop[0], base + f.loop[i], base + f.loop[i + 1]);
      }
    }
    base += cell.vertices().size();
  }
  return s;
}

std::string decomposition_to_json(const ConvexDecomposition& decomp) {
  nlohmann::ordered_json j;
  j["format"] = "compod-decomposition";
  j["version"] = 1;
  j["overlap"] = decomp.overlap;
  j["volume_cells"] = decomp.cells.size();
  j["volume_facets"] = decomp.facet_count();
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < decomp.cells.size(); ++c) {
    nlohmann::ordered_json jc;
    auto& hs = jc["halfspaces"] = nlohmann::ordered_json::array();
    for (const HalfSpace& h : decomp.cells[c].halfspaces()) {
      const PlaneEq p = h.outward_plane();
      hs.push_back({p.n.x(), p.n.y(), p.n.z(), p.d});
    }
    jc["leaves"] = c < decomp.provenance.size() ? decomp.provenance[c] : std::vector<int>{};
    cells.push_back(std::move(jc));
  }
  return j.dump(1) + "\n";
}

DecompositionRecord decomposition_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("decomposition: {}", e.what()), e.byte);
  }
  if (j.value("format", "") != "compod-decomposition") {
    throw ParseError("decomposition: not a compod-decomposition document", 0);
  }
  DecompositionRecord r;
  try {
    r.overlap = j.at("overlap").get<bool>();
    for (const auto& jc : j.at("cells")) {
      std::vector<PlaneEq> hs;
      for (const auto& h : jc.at("halfspaces")) {
        PlaneEq p;
        p.n = Vec3(h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>());
        p.d = h.at(3).get<double>();
        hs.push_back(p);
      }
      r.halfspaces.push_back(std::move(hs));
      r.provenance.push_back(jc.at("leaves").get<std::vector<int>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("decomposition: {}", e.what()), 0);
  }
  return r;
}

void export_decomposition(const ConvexDecomposition& decomp,
                          const std::filesystem::path& path,
                          DecompositionFormat format) {
  write_file(path.string(), format == DecompositionFormat::Obj ? decomposition_to_obj(decomp)
                                                               : decomposition_to_json(decomp));
}

}  // namespace compod
