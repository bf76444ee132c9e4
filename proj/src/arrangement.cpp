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

#include "compod/arrangement.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <json.hpp>
#include <random>

#include <fmt/format.h>

#include "compod/error.hpp"
#include "compod/log.hpp"
#include "compod/memory.hpp"

namespace compod {

// ------------------------------------------------------------- graph -----

int CellAdjacencyGraph::add_edge(int a, int b, std::vector<Vec3> polygon,
                                 int source, double area) {
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({a, b, std::move(polygon), source, area, true});
  const auto need = static_cast<std::size_t>(std::max(a, b)) + 1;
  if (by_node_.size() < need) by_node_.resize(need);
  by_node_[a].push_back(id);
  by_node_[b].push_back(id);
  ++live_;
  return id;
}

void CellAdjacencyGraph::remove_edge(int e) {
  GraphEdge& edge = edges_[e];
  if (!edge.alive) return;
  edge.alive = false;
  edge.polygon.clear();
  edge.polygon.shrink_to_fit();
  for (int n : {edge.a, edge.b}) std::erase(by_node_[n], e);
  --live_;
}

std::vector<int> CellAdjacencyGraph::incident(int node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= by_node_.size()) return {};
  return by_node_[node];
}

std::vector<int> CellAdjacencyGraph::live_edges() const {
  std::vector<int> out;
  out.reserve(live_);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].alive) out.push_back(static_cast<int>(e));
  }
  return out;
}

std::vector<int> Arrangement::leaves() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) out.push_back(static_cast<int>(i));
  }
  return out;
}

Arrangement make_arrangement(const ConvexCell& domain, const ToleranceContext& tol) {
  Arrangement arr;
  arr.tol = tol;
  BspNode root;
  root.cell = domain;
  arr.nodes.push_back(std::move(root));
  arr.stats.cells = 1;
  return arr;
}

// ------------------------------------------------------------- split -----

SplitStatus split_leaf(Arrangement& arr, int leaf, const PlaneEq& plane, int source) {
  SplitResult r = split_cell(arr.nodes[leaf].cell, plane, arr.tol, source);
  if (r.status != SplitStatus::Ok) return r.status;
  const double eps = arr.tol.eps_abs();
  const double min_area = eps * eps;
  const int neg = static_cast<int>(arr.nodes.size());
  const int pos = neg + 1;
  const int depth = arr.nodes[leaf].depth + 1;
  for (ConvexCell* c : {&r.negative, &r.positive}) {
    BspNode child;
    child.cell = std::move(*c);
    child.parent = leaf;
    child.depth = depth;
    arr.nodes.push_back(std::move(child));
  }
  BspNode& node = arr.nodes[leaf];
  node.children = {neg, pos};
  node.split_plane = plane;
  node.split_source = source;

  // Old interfaces go to the child (or both children) they now border.
  for (int e : arr.graph.incident(leaf)) {
    const GraphEdge old = arr.graph.edge(e);
    arr.graph.remove_edge(e);
    auto [part_neg, part_pos] = clip_convex_polygon(old.polygon, plane, eps);
    for (int side = 0; side < 2; ++side) {
      std::vector<Vec3>& part = side == 0 ? part_neg : part_pos;
      if (part.size() < 3) continue;
      const double area = polygon_area(part);
      if (area <= min_area) continue;
      const int child = side == 0 ? neg : pos;
      const int a = old.a == leaf ? child : old.a;
      const int b = old.b == leaf ? child : old.b;
      arr.graph.add_edge(a, b, std::move(part), old.source, area);
    }
  }
  const double cut_area = polygon_area(r.interface);
  arr.graph.add_edge(neg, pos, std::move(r.interface), source, cut_area);

  arr.split_order.push_back(leaf);
  ++arr.stats.splits;
  ++arr.stats.cells;
  arr.stats.max_depth = std::max(arr.stats.max_depth, depth);
  return SplitStatus::Ok;
}

namespace {

// Conservative extent of one assignment, for side tests without a scan.
struct Extent {
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double radius = 0.0;     // in the primitive plane
  double thickness = 0.0;  // off the primitive plane
  double weight = 0.0;     // point count or polygon area
};

template <typename F>
void for_each_point(const Arrangement& arr, const Assignment& a, F&& f) {
  if (!a.polygon.empty()) {
    for (const Vec3& p : a.polygon) f(p);
  } else {
    for (int i : a.points) f(arr.points[i]);
  }
}

Extent extent_of(const Arrangement& arr, const Assignment& a) {
  Extent e;
  const PlaneEq& plane = arr.planes[a.primitive];
  e.normal = plane.n;
  std::size_t n = 0;
  for_each_point(arr, a, [&](const Vec3& p) {
    e.centroid += p;
    ++n;
  });
  if (n == 0) return e;
  e.centroid /= static_cast<double>(n);
  const double dc = signed_distance(plane, e.centroid);
  for_each_point(arr, a, [&](const Vec3& p) {
    const double t = signed_distance(plane, p) - dc;
    const Vec3 r = p - e.centroid - t * plane.n;
    e.radius = std::max(e.radius, r.norm());
    e.thickness = std::max(e.thickness, std::abs(t));
  });
  // Absorb rounding in the bound itself.
  e.radius = e.radius * (1.0 + 1e-12) + 1e-300;
  e.thickness = e.thickness * (1.0 + 1e-12);
  e.weight = a.polygon.empty() ? static_cast<double>(a.points.size())
                               : polygon_area(a.polygon);
  return e;
}

// Bit 0: some point strictly negative, bit 1: some point strictly positive.
int side_mask(const Arrangement& arr, const PlaneEq& plane, const Assignment& a,
              const Extent& e, double eps) {
  const double s = signed_distance(plane, e.centroid);
  const double c = std::min(1.0, std::abs(plane.n.dot(e.normal)));
  const double bound = std::sqrt(std::max(0.0, 1.0 - c * c)) * e.radius +
                       c * e.thickness + 1e-15 * std::abs(s);
  if (s - bound > eps) return 2;
  if (s + bound < -eps) return 1;
  if (std::abs(s) + bound <= eps) return 0;
  int mask = 0;
  auto visit = [&](const Vec3& p) {
    const double d = signed_distance(plane, p);
    if (d > eps) mask |= 2;
    else if (d < -eps) mask |= 1;
  };
  if (!a.polygon.empty()) {
    for (const Vec3& p : a.polygon) {
      visit(p);
      if (mask == 3) break;
    }
  } else {
    for (int i : a.points) {
      visit(arr.points[i]);
      if (mask == 3) break;
    }
  }
  return mask;
}

// Larger weight first, then smaller primitive id.
bool better_tie(double w1, int id1, double w2, int id2) {
  if (w1 != w2) return w1 > w2;
  return id1 < id2;
}

}  // namespace

std::optional<SplitChoice> select_split(const Arrangement& arr, int leaf,
                                        Ordering ordering) {
  const auto& assigned = arr.nodes[leaf].assigned;
  const std::size_t m = assigned.size();
  if (m == 0) return std::nullopt;

  if (ordering == Ordering::AreaDesc) {
    int best = assigned[0].primitive;
    for (const Assignment& a : assigned) {
      const double wa = arr.hull_area[a.primitive], wb = arr.hull_area[best];
      if (better_tie(wa, a.primitive, wb, best)) best = a.primitive;
    }
    return SplitChoice{best, false};
  }

  std::vector<Extent> ext(m);
  for (std::size_t i = 0; i < m; ++i) ext[i] = extent_of(arr, assigned[i]);
  if (m == 1) return SplitChoice{assigned[0].primitive, true};

  const double eps = arr.tol.eps_abs();
  int prio_best = -1;
  int prod_best = -1;
  long long best_product = -1;
  for (std::size_t i = 0; i < m; ++i) {
    const PlaneEq& plane = arr.planes[assigned[i].primitive];
    long long left = 0, right = 0;
    bool any_neg = false, any_pos = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const int mask = side_mask(arr, plane, assigned[j], ext[j], eps);
      any_neg |= (mask & 1) != 0;
      any_pos |= (mask & 2) != 0;
      if (mask == 1) ++left;
      if (mask == 2) ++right;
    }
    const int id = assigned[i].primitive;
    if (!(any_neg && any_pos)) {
      if (prio_best < 0 || better_tie(ext[i].weight, id, ext[prio_best].weight,
                                      assigned[prio_best].primitive)) {
        prio_best = static_cast<int>(i);
      }
    }
    const long long product = left * right;
    if (prod_best < 0 || product > best_product ||
        (product == best_product &&
         better_tie(ext[i].weight, id, ext[prod_best].weight,
                    assigned[prod_best].primitive))) {
      prod_best = static_cast<int>(i);
      best_product = product;
    }
  }
  if (ordering == Ordering::Dynamic && prio_best >= 0) {
    return SplitChoice{assigned[prio_best].primitive, true};
  }
  return SplitChoice{assigned[prod_best].primitive, false};
}

SplitStatus apply_split(Arrangement& arr, int leaf, int primitive) {
  const PlaneEq plane = arr.planes[primitive];
  const SplitStatus status = split_leaf(arr, leaf, plane, primitive);
  if (status != SplitStatus::Ok) return status;
  const double eps = arr.tol.eps_abs();
  const double min_area = eps * eps;
  std::vector<Assignment> assigned = std::move(arr.nodes[leaf].assigned);
  arr.nodes[leaf].assigned.clear();
  const int neg = arr.nodes[leaf].children[0];
  const int pos = arr.nodes[leaf].children[1];
  for (Assignment& a : assigned) {
    if (a.primitive == primitive) continue;
    Assignment na{a.primitive, {}, {}}, pa{a.primitive, {}, {}};
    if (!a.polygon.empty()) {
      auto [pn, pp] = clip_convex_polygon(a.polygon, plane, eps);
      if (pn.size() >= 3 && polygon_area(pn) > min_area) na.polygon = std::move(pn);
      if (pp.size() >= 3 && polygon_area(pp) > min_area) pa.polygon = std::move(pp);
      arr.stats.reassignments += a.polygon.size();
    } else {
      for (int i : a.points) {
        const double d = signed_distance(plane, arr.points[i]);
        if (d < -eps) na.points.push_back(i);
        else if (d > eps) pa.points.push_back(i);
      }
      arr.stats.reassignments += a.points.size();
    }
    if (!na.points.empty() || !na.polygon.empty()) {
      arr.nodes[neg].assigned.push_back(std::move(na));
    }
    if (!pa.points.empty() || !pa.polygon.empty()) {
      arr.nodes[pos].assigned.push_back(std::move(pa));
    }
  }
  return SplitStatus::Ok;
}

// ------------------------------------------------------------- build -----

namespace {

std::vector<Vec3> sample_convex_polygon(const std::vector<Vec3>& poly, std::size_t n,
                                        std::mt19937_64& rng) {
  std::vector<double> areas;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    areas.push_back(0.5 * (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]).norm());
  }
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = pick(rng) + 1;
    double u = uni(rng), v = uni(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    out.push_back(poly[0] + u * (poly[t] - poly[0]) + v * (poly[t + 1] - poly[0]));
  }
  return out;
}

}  // namespace

Arrangement build_arrangement(std::span<const PlanarPrimitive> primitives,
                              const PointCloud& cloud, const ArrangementConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  reset_peak_heap();
  validate_primitives(primitives, cloud.points.size());
  if (cfg.padding_frac < 0.0) throw ValidationError("padding must be >= 0");
  if (!(cfg.eps_rel > 0.0)) throw ValidationError("eps_rel must be > 0");

  std::vector<Vec3> inliers = gather_inliers(primitives, cloud);
  if (inliers.empty()) {
    if (cloud.points.empty()) throw ValidationError("no points to bound the domain");
    inliers = cloud.points;
  }
  const ConvexCell domain = dilated_bbox(inliers, cfg.padding_frac);
  Vec3 lo = domain.vertices()[0], hi = lo;
  for (const Vec3& v : domain.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  Arrangement arr = make_arrangement(domain, ToleranceContext((hi - lo).norm(), cfg.eps_rel));
  const double eps = arr.tol.eps_abs();

  const std::size_t k = primitives.size();
  arr.planes.resize(k);
  arr.hull_area.assign(k, 0.0);
  // Area ordering inserts each primitive into every leaf its hull meets, so
  // it tracks clipped hull polygons whatever the basis.
  const bool polygon_mode = cfg.ordering == Ordering::AreaDesc;
  const bool need_hulls = polygon_mode || cfg.basis != Basis::InlierPoints;
  std::vector<std::vector<Vec3>> hulls(k);
  for (std::size_t i = 0; i < k; ++i) {
    arr.planes[i] = primitives[i].plane;
    if (!need_hulls) continue;
    try {
      hulls[i] = primitive_hull(primitives[i], cloud, eps);
      arr.hull_area[i] = polygon_area(hulls[i]);
    } catch (const DegenerateInput&) {
      log_info("primitive {} has collinear inliers; skipped in hull modes", i);
    }
  }

  BspNode& root = arr.nodes[arr.root];
  if (polygon_mode) {
    for (std::size_t i = 0; i < k; ++i) {
      if (hulls[i].empty()) continue;
      root.assigned.push_back({static_cast<int>(i), {}, hulls[i]});
    }
  } else if (cfg.basis == Basis::HullVertices) {
    for (std::size_t i = 0; i < k; ++i) {
      if (hulls[i].empty()) continue;
      Assignment a{static_cast<int>(i), {}, {}};
      for (const Vec3& p : hulls[i]) {
        a.points.push_back(static_cast<int>(arr.points.size()));
        arr.points.push_back(p);
      }
      root.assigned.push_back(std::move(a));
    }
  } else if (cfg.basis == Basis::HullSampled) {
    double total = 0.0;
    for (double a : arr.hull_area) total += a;
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = 0; i < k; ++i) {
      if (hulls[i].empty() || total <= 0.0) continue;
      const auto n = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(
                 static_cast<double>(cfg.hull_samples) * arr.hull_area[i] / total)));
      Assignment a{static_cast<int>(i), {}, {}};
      for (const Vec3& p : sample_convex_polygon(hulls[i], n, rng)) {
        a.points.push_back(static_cast<int>(arr.points.size()));
        arr.points.push_back(p);
      }
      root.assigned.push_back(std::move(a));
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      Assignment a{static_cast<int>(i), {}, {}};
      for (int q : primitives[i].inliers) {
        a.points.push_back(static_cast<int>(arr.points.size()));
        arr.points.push_back(cloud.points[q]);
      }
      root.assigned.push_back(std::move(a));
    }
  }

  // Two FIFO tiers: leaves whose choice satisfies the priority condition go
  // first, globally.
  std::deque<int> tiers[2];
  std::vector<SplitChoice> choice;
  auto enqueue = [&](int leaf) {
    const auto c = select_split(arr, leaf, cfg.ordering);
    if (!c) return;
    if (choice.size() < arr.nodes.size()) choice.resize(arr.nodes.size());
    choice[leaf] = *c;
    tiers[c->priority ? 0 : 1].push_back(leaf);
  };
  enqueue(arr.root);
  while (!tiers[0].empty() || !tiers[1].empty()) {
    std::deque<int>& q = tiers[0].empty() ? tiers[1] : tiers[0];
    const int leaf = q.front();
    q.pop_front();
    const SplitChoice c = choice[leaf];
    const SplitStatus s = apply_split(arr, leaf, c.primitive);
    if (s == SplitStatus::Ok) {
      if (c.priority) ++arr.stats.priority_splits;
      enqueue(arr.nodes[leaf].children[0]);
      enqueue(arr.nodes[leaf].children[1]);
    } else {
      // The plane misses this cell: retire the primitive here and re-select.
      ++arr.stats.failed_splits;
      std::erase_if(arr.nodes[leaf].assigned,
                    [&](const Assignment& a) { return a.primitive == c.primitive; });
      enqueue(leaf);
    }
  }
  arr.stats.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  arr.stats.peak_bytes = peak_heap_bytes();
  log_debug("arrangement: {} cells, {} splits ({} priority, {} failed)", arr.stats.cells,
            arr.stats.splits, arr.stats.priority_splits, arr.stats.failed_splits);
  return arr;
}

Arrangement exhaustive_arrangement(std::span<const PlaneEq> planes,
                                   const ConvexCell& domain, const ToleranceContext& tol) {
  const auto t0 = std::chrono::steady_clock::now();
  reset_peak_heap();
  Arrangement arr = make_arrangement(domain, tol);
  arr.planes.assign(planes.begin(), planes.end());
  arr.hull_area.assign(planes.size(), 0.0);
  const double eps = tol.eps_abs();
  std::vector<int> current{arr.root};
  for (std::size_t k = 0; k < planes.size(); ++k) {
    std::vector<int> next;
    next.reserve(current.size() * 2);
    for (int leaf : current) {
      if (arr.nodes[leaf].cell.crossed_by(planes[k], eps) &&
          split_leaf(arr, leaf, planes[k], static_cast<int>(k)) == SplitStatus::Ok) {
        next.push_back(arr.nodes[leaf].children[0]);
        next.push_back(arr.nodes[leaf].children[1]);
      } else {
        next.push_back(leaf);
      }
    }
    current = std::move(next);
  }
  arr.stats.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  arr.stats.peak_bytes = peak_heap_bytes();
  return arr;
}

ArrangementReport arrangement_stats(const Arrangement& arr) {
  ArrangementReport r;
  r.cells = arr.stats.cells;
  r.splits = arr.stats.splits;
  r.max_depth = arr.stats.max_depth;
  r.edges = arr.graph.edge_count();
  r.wall_s = arr.stats.wall_s;
  r.peak_mem_mb = static_cast<double>(arr.stats.peak_bytes) / (1024.0 * 1024.0);
  return r;
}

int locate_leaf(const Arrangement& arr, const Vec3& p) {
  int n = arr.root;
  while (!arr.nodes[n].is_leaf()) {
    const BspNode& node = arr.nodes[n];
    n = signed_distance(node.split_plane, p) < 0.0 ? node.children[0] : node.children[1];
  }
  return n;
}

// -------------------------------------------------------------- json -----

namespace {

using nlohmann::json;

json plane_json(const PlaneEq& p) { return {p.n.x(), p.n.y(), p.n.z(), p.d}; }

PlaneEq plane_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("plane needs 4 numbers", 0);
  PlaneEq p;
  p.n = Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  p.d = j[3].get<double>();
  return p;
}

const char* label_name(Label l) {
  switch (l) {
    case Label::Inside: return "in";
    case Label::Outside: return "out";
    default: return nullptr;
  }
}

}  // namespace

std::string arrangement_to_json(const Arrangement& arr) {
  json j;
  j["format"] = "compod-arrangement";
  j["version"] = 1;
  j["tolerance"] = {{"diagonal", arr.tol.bbox_diagonal}, {"eps_rel", arr.tol.eps_rel}};
  const auto& rv = arr.nodes[arr.root].cell.vertices();
  Vec3 lo = rv[0], hi = rv[0];
  for (const Vec3& v : rv) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  j["domain"] = {{"lo", {lo.x(), lo.y(), lo.z()}}, {"hi", {hi.x(), hi.y(), hi.z()}}};
  json planes = json::array();
  for (const PlaneEq& p : arr.planes) planes.push_back(plane_json(p));
  j["planes"] = std::move(planes);
  j["split_order"] = arr.split_order;
  json nodes = json::array();
  for (std::size_t i = 0; i < arr.nodes.size(); ++i) {
    const BspNode& n = arr.nodes[i];
    json jn;
    jn["id"] = i;
    jn["parent"] = n.parent;
    json hs = json::array();
    for (const HalfSpace& h : n.cell.halfspaces()) {
      hs.push_back({h.plane.n.x(), h.plane.n.y(), h.plane.n.z(), h.plane.d,
                    static_cast<int>(h.side), h.source});
    }
    jn["halfspaces"] = std::move(hs);
    if (n.is_leaf()) {
      jn["children"] = nullptr;
      jn["split"] = nullptr;
    } else {
      jn["children"] = {n.children[0], n.children[1]};
      jn["split"] = {{"plane", plane_json(n.split_plane)}, {"source", n.split_source}};
    }
    const char* l = label_name(n.label);
    jn["label"] = l ? json(l) : json(nullptr);
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (int e : arr.graph.live_edges()) {
    const GraphEdge& g = arr.graph.edge(e);
    edges.push_back({g.a, g.b, g.area});
  }
  j["edges"] = std::move(edges);
  j["stats"] = {{"cells", arr.stats.cells},
                {"splits", arr.stats.splits},
                {"priority_splits", arr.stats.priority_splits},
                {"max_depth", arr.stats.max_depth}};
  return j.dump(1);
}

Arrangement arrangement_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid arrangement JSON: ") + e.what(), e.byte);
  }
  try {
    if (j.value("format", "") != "compod-arrangement") {
      throw ParseError("not an arrangement file", 0);
    }
    const ToleranceContext tol(j["tolerance"]["diagonal"].get<double>(),
                               j["tolerance"]["eps_rel"].get<double>());
    const auto& d = j["domain"];
    const Vec3 lo(d["lo"][0].get<double>(), d["lo"][1].get<double>(), d["lo"][2].get<double>());
    const Vec3 hi(d["hi"][0].get<double>(), d["hi"][1].get<double>(), d["hi"][2].get<double>());
    Arrangement arr = make_arrangement(ConvexCell::box(lo, hi), tol);
    for (const json& p : j["planes"]) arr.planes.push_back(plane_from_json(p));
    arr.hull_area.assign(arr.planes.size(), 0.0);
    const json& nodes = j["nodes"];
    for (const json& id_json : j["split_order"]) {
      const int id = id_json.get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= arr.nodes.size() ||
          static_cast<std::size_t>(id) >= nodes.size() || !arr.nodes[id].is_leaf()) {
        throw ParseError(fmt::format("split order names invalid node {}", id), 0);
      }
      const json& jn = nodes[id];
      const PlaneEq plane = plane_from_json(jn["split"]["plane"]);
      const int source = jn["split"]["source"].get<int>();
      if (split_leaf(arr, id, plane, source) != SplitStatus::Ok) {
        throw ParseError(fmt::format("split of node {} cannot be replayed", id), 0);
      }
      const auto& ch = jn["children"];
      if (ch[0].get<int>() != arr.nodes[id].children[0] ||
          ch[1].get<int>() != arr.nodes[id].children[1]) {
        throw ParseError(fmt::format("children of node {} do not match", id), 0);
      }
    }
    if (arr.nodes.size() != nodes.size()) {
      throw ParseError("node count does not match the split history", 0);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const json& l = nodes[i]["label"];
      if (l.is_string()) {
        arr.nodes[i].label = l.get<std::string>() == "in" ? Label::Inside : Label::Outside;
      }
    }
    if (j.contains("stats")) arr.stats.priority_splits = j["stats"].value("priority_splits", 0);
    return arr;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid arrangement JSON: ") + e.what(), 0);
  }
}

}  // namespace compod
