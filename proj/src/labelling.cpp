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

#include "compod/labelling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <json.hpp>
#include <limits>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "compod/bvh.hpp"
#include "compod/error.hpp"
#include "compod/kdtree.hpp"
#include "compod/log.hpp"
#include "compod/parallel.hpp"

namespace compod {

namespace {

// Votes whose normal is closer than this to the interface plane are ignored;
// they come from surfaces crossing the interface, not lying on it.
constexpr double kMinVoteAlignment = 0.5;

class Dinic {
 public:
  explicit Dinic(int n) : adj_(n), level_(n), next_(n) {}

  void add_arc(int u, int v, double cap, double rev_cap) {
    adj_[u].push_back({v, static_cast<int>(adj_[v].size()), cap});
    adj_[v].push_back({u, static_cast<int>(adj_[u].size()) - 1, rev_cap});
    max_cap_ = std::max({max_cap_, cap, rev_cap});
  }

  void run(int s, int t) {
    eps_ = 1e-12 * max_cap_;
    while (bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (push(s, t, std::numeric_limits<double>::infinity()) > 0.0) {
      }
    }
  }

  /// Nodes reachable from s in the residual graph.
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const Arc& a : adj_[u]) {
        if (a.cap > eps_ && !seen[a.to]) {
          seen[a.to] = 1;
          q.push_back(a.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to, rev;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> q{s};
    level_[s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const Arc& a : adj_[u]) {
        if (a.cap > eps_ && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          q.push_back(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double push(int u, int t, double f) {
    if (u == t) return f;
    for (int& i = next_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
      Arc& a = adj_[u][i];
      if (a.cap <= eps_ || level_[a.to] != level_[u] + 1) continue;
      const double pushed = push(a.to, t, std::min(f, a.cap));
      if (pushed > 0.0) {
        a.cap -= pushed;
        adj_[a.to][a.rev].cap += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_, next_;
  double max_cap_ = 0.0;
  double eps_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (key + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

OccupancyLabels blank_labels(const Arrangement& arr) {
  OccupancyLabels out;
  out.by_node.assign(arr.nodes.size(), Label::Unknown);
  out.margin.assign(arr.nodes.size(), 0.0);
  return out;
}

}  // namespace

void LabelConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError(fmt::format("lambda must be >= 0, got {}", lambda));
  }
  if (!(vote_radius_frac > 0.0)) {
    throw ValidationError("vote_radius_frac must be positive");
  }
  if (proxy_samples_per_cell < 1) {
    throw ValidationError("proxy_samples_per_cell must be >= 1");
  }
}

std::size_t OccupancyLabels::count(Label l) const {
  return static_cast<std::size_t>(std::count(by_node.begin(), by_node.end(), l));
}

double labelling_energy(std::span<const UnaryCost> unary,
                        std::span<const PairwiseTerm> pairwise,
                        std::span<const int> labels) {
  double e = 0.0;
  for (std::size_t i = 0; i < unary.size(); ++i) e += unary[i][labels[i] ? 1 : 0];
  for (const PairwiseTerm& p : pairwise) {
    if (labels[p.a] != labels[p.b]) e += p.weight;
  }
  return e;
}

CutResult min_cut(std::span<const UnaryCost> unary,
                  std::span<const PairwiseTerm> pairwise) {
  const int n = static_cast<int>(unary.size());
  for (const PairwiseTerm& p : pairwise) {
    if (p.weight < 0.0) {
      throw NegativePairwise(
          fmt::format("pairwise weight {} between {} and {} is negative", p.weight, p.a, p.b));
    }
    if (p.a < 0 || p.b < 0 || p.a >= n || p.b >= n) {
      throw ValidationError(fmt::format("pairwise term ({}, {}) out of range", p.a, p.b));
    }
  }
  // Source side = inside. Cutting s->i means i is outside and pays its
  // outside cost; cutting i->t means i is inside.
  const int s = n, t = n + 1;
  Dinic g(n + 2);
  for (int i = 0; i < n; ++i) {
    const double m = std::min(unary[i][0], unary[i][1]);
    const double out_cost = unary[i][0] - m, in_cost = unary[i][1] - m;
    if (out_cost > 0.0) g.add_arc(s, i, out_cost, 0.0);
    if (in_cost > 0.0) g.add_arc(i, t, in_cost, 0.0);
  }
  for (const PairwiseTerm& p : pairwise) {
    if (p.weight > 0.0 && p.a != p.b) g.add_arc(p.a, p.b, p.weight, p.weight);
  }
  g.run(s, t);
  const std::vector<char> side = g.source_side(s);
  CutResult r;
  r.labels.resize(n);
  for (int i = 0; i < n; ++i) r.labels[i] = side[i] ? 1 : 0;
  r.energy = labelling_energy(unary, pairwise, r.labels);
  return r;
}

OccupancyLabels label_cells_normal(const Arrangement& arr,
                                   std::span<const PlanarPrimitive> primitives,
                                   const PointCloud& cloud, const LabelConfig& cfg) {
  cfg.validate();
  OccupancyLabels out = blank_labels(arr);
  const std::vector<int> leaves = arr.leaves();
  bool any_inliers = false;
  for (const auto& p : primitives) any_inliers = any_inliers || !p.inliers.empty();
  if (any_inliers && !cloud.has_normals()) {
    throw MissingNormals("normal-based labelling needs oriented point normals");
  }

  // Voting points: every inlier, once.
  std::vector<char> used(cloud.points.size(), 0);
  for (const auto& p : primitives) {
    for (int i : p.inliers) used[i] = 1;
  }
  std::vector<int> voters;
  std::vector<Vec3> voter_pts;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (used[i]) {
      voters.push_back(static_cast<int>(i));
      voter_pts.push_back(cloud.points[i]);
    }
  }
  const KdTree tree(voter_pts);
  const double radius = cfg.vote_radius_frac * arr.tol.bbox_diagonal;

  // Per-edge (votes for a inside, votes for b inside, ... outside), summed
  // afterwards in edge order.
  const std::vector<int> edges = arr.graph.live_edges();
  struct EdgeVotes {
    double a_in = 0, a_out = 0, b_in = 0, b_out = 0;
  };
  std::vector<EdgeVotes> votes(edges.size());
  if (!voters.empty()) {
    parallel_for(edges.size(), cfg.threads, [&](std::size_t k) {
      const GraphEdge& e = arr.graph.edge(edges[k]);
      const Vec3 ne = polygon_area_vector(e.polygon).normalized();
      Vec3 lo = e.polygon[0], hi = e.polygon[0];
      for (const Vec3& v : e.polygon) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      std::vector<int> hits;
      tree.box_query(lo - Vec3::Constant(radius), hi + Vec3::Constant(radius), hits);
      std::sort(hits.begin(), hits.end());
      EdgeVotes& ev = votes[k];
      for (int h : hits) {
        const Vec3& p = voter_pts[h];
        if (point_convex_polygon_distance(p, e.polygon, ne) > radius) continue;
        const double align = cloud.normals[voters[h]].dot(ne);
        if (std::abs(align) < kMinVoteAlignment) continue;
        // The normal points out of the solid: the cell it points into is
        // outside, the one behind it inside.
        if (align > 0.0) {
          ev.a_in += 1.0;
          ev.b_out += 1.0;
        } else {
          ev.a_out += 1.0;
          ev.b_in += 1.0;
        }
      }
    });
  }
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < leaves.size(); ++i) index[leaves[i]] = i;
  std::vector<double> vin(leaves.size(), 0.0), vout(leaves.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const GraphEdge& e = arr.graph.edge(edges[k]);
    const std::size_t a = index.at(e.a), b = index.at(e.b);
    vin[a] += votes[k].a_in;
    vout[a] += votes[k].a_out;
    vin[b] += votes[k].b_in;
    vout[b] += votes[k].b_out;
    total += votes[k].a_in + votes[k].a_out;
  }

  if (total <= 0.0) {
    log_warn("no normal votes reached any interface; every cell is outside");
    out.empty_votes = true;
    for (int l : leaves) out.by_node[l] = Label::Outside;
    out.energy = 0.0;
    return out;
  }
  // Each vote lands on two cells.
  total *= 2.0;

  std::vector<UnaryCost> unary(leaves.size());
  double max_mass = 0.0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    unary[i] = {vin[i] / total, vout[i] / total};
    max_mass = std::max(max_mass, (vin[i] + vout[i]) / total);
  }
  // Large enough that no vote or smoothness term can pull a boundary cell in.
  const double prior = 10.0 * std::max(max_mass, cfg.lambda);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (arr.nodes[leaves[i]].cell.touches_box()) unary[i][1] += prior;
  }
  double total_area = 0.0;
  for (int e : edges) total_area += arr.graph.edge(e).area;
  std::vector<PairwiseTerm> pairwise;
  if (cfg.lambda > 0.0 && total_area > 0.0) {
    pairwise.reserve(edges.size());
    for (int e : edges) {
      const GraphEdge& ge = arr.graph.edge(e);
      pairwise.push_back({static_cast<int>(index.at(ge.a)), static_cast<int>(index.at(ge.b)),
                          cfg.lambda * ge.area / total_area});
    }
  }
  const CutResult cut = min_cut(unary, pairwise);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    out.by_node[leaves[i]] = cut.labels[i] ? Label::Inside : Label::Outside;
    out.margin[leaves[i]] = unary[i][0] - unary[i][1];
  }
  out.energy = cut.energy;
  log_info("normal labelling: {} inside of {} cells, energy {:.6g}",
           out.count(Label::Inside), leaves.size(), out.energy);
  return out;
}

OccupancyLabels label_cells_proxy(const Arrangement& arr, const SurfaceMesh& proxy,
                                  const LabelConfig& cfg) {
  cfg.validate();
  const MeshAudit audit = audit_mesh(proxy);
  if (!audit.watertight() || proxy.empty()) {
    throw OpenProxyMesh(fmt::format(
        "proxy mesh is not closed: {} boundary edges, {} non-manifold edges",
        audit.boundary_edges, audit.nonmanifold_edges));
  }
  const InsideTester tester(proxy);
  OccupancyLabels out = blank_labels(arr);
  const std::vector<int> leaves = arr.leaves();
  const int n = cfg.proxy_samples_per_cell;
  std::vector<int> inside_votes(leaves.size(), 0);
  parallel_for(leaves.size(), cfg.threads, [&](std::size_t k) {
    const ConvexCell& cell = arr.nodes[leaves[k]].cell;
    const auto& verts = cell.vertices();
    const Vec3 c = cell.vertex_centroid();
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(leaves[k])));
    std::exponential_distribution<double> w;
    int in = 0;
    for (int s = 0; s < n; ++s) {
      // Halfway between the vertex centroid and a random convex combination
      // of the vertices, so always strictly interior.
      Vec3 mix = Vec3::Zero();
      double sum = 0.0;
      for (const Vec3& v : verts) {
        const double x = w(rng);
        mix += x * v;
        sum += x;
      }
      const Vec3 p = 0.5 * c + 0.5 * (mix / sum);
      if (tester.inside(p)) ++in;
    }
    inside_votes[k] = in;
  });
  std::size_t forced = 0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const int in = inside_votes[k];
    Label l = 2 * in > n ? Label::Inside : Label::Outside;
    if (l == Label::Inside && arr.nodes[leaves[k]].cell.touches_box()) {
      l = Label::Outside;
      ++forced;
    }
    out.by_node[leaves[k]] = l;
    out.margin[leaves[k]] = static_cast<double>(2 * in - n) / n;
  }
  if (forced > 0) {
    log_warn("proxy reaches the domain boundary; {} boundary cells forced outside", forced);
  }
  log_info("proxy labelling: {} inside of {} cells", out.count(Label::Inside), leaves.size());
  return out;
}

void apply_labels(Arrangement& arr, const OccupancyLabels& labels) {
  for (std::size_t i = 0; i < arr.nodes.size(); ++i) {
    arr.nodes[i].label = arr.nodes[i].is_leaf() ? labels.by_node.at(i) : Label::Unknown;
  }
}

OccupancyLabels labels_of(const Arrangement& arr) {
  OccupancyLabels out = blank_labels(arr);
  for (std::size_t i = 0; i < arr.nodes.size(); ++i) {
    if (arr.nodes[i].is_leaf()) out.by_node[i] = arr.nodes[i].label;
  }
  return out;
}

std::string labels_to_json(const Arrangement& arr, const OccupancyLabels& labels) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (int l : arr.leaves()) {
    const Label v = labels.by_node.at(l);
    if (v == Label::Unknown) continue;
    j[std::to_string(l)] = v == Label::Inside ? "in" : "out";
  }
  return j.dump(1) + "\n";
}

OccupancyLabels labels_from_json(const Arrangement& arr, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("labels: {}", e.what()), e.byte);
  }
  if (!j.is_object()) throw ParseError("labels: expected an object", 0);
  OccupancyLabels out = blank_labels(arr);
  for (auto it = j.begin(); it != j.end(); ++it) {
    int id = -1;
    try {
      id = std::stoi(it.key());
    } catch (const std::exception&) {
      throw ParseError(fmt::format("labels: bad node id '{}'", it.key()), 0);
    }
    if (id < 0 || id >= static_cast<int>(arr.nodes.size()) || !arr.nodes[id].is_leaf()) {
      throw ParseError(fmt::format("labels: node {} is not a leaf", id), 0);
    }
    const std::string v = it.value().is_string() ? it.value().get<std::string>() : "";
    if (v != "in" && v != "out") {
      throw ParseError(fmt::format("labels: node {} has label '{}'", id, v), 0);
    }
    out.by_node[id] = v == "in" ? Label::Inside : Label::Outside;
  }
  for (int l : arr.leaves()) {
    if (out.by_node[l] == Label::Unknown) {
      throw ParseError(fmt::format("labels: leaf {} is unlabelled", l), 0);
    }
  }
  return out;
}

}  // namespace compod
