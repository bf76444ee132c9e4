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

#include "compod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "compod/cdt.hpp"
#include "compod/error.hpp"
#include "compod/kdtree.hpp"
#include "compod/log.hpp"
#include "compod/union_find.hpp"

namespace compod {

namespace {

struct CellKey {
  long long x, y, z;
  bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
    h ^= static_cast<std::size_t>(k.y) * 19349663u;
    h ^= static_cast<std::size_t>(k.z) * 83492791u;
    return h;
  }
};

void drop_repeats(std::vector<int>& loop) {
  std::vector<int> out;
  for (int v : loop) {
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  loop = std::move(out);
}

}  // namespace

std::vector<Vec3> SurfaceMesh::polygon(std::size_t facet) const {
  std::vector<Vec3> out;
  for (int i : facets[facet].loop) out.push_back(vertices[i]);
  return out;
}

Vec3 SurfaceMesh::facet_normal(std::size_t facet) const {
  const auto poly = polygon(facet);
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += poly[i].cross(poly[(i + 1) % poly.size()]);
  }
  const double len = s.norm();
  return len > 0.0 ? Vec3(s / len) : Vec3::Zero();
}

double SurfaceMesh::area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < facets.size(); ++f) {
    const auto poly = polygon(f);
    Vec3 s = Vec3::Zero();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      s += poly[i].cross(poly[(i + 1) % poly.size()]);
    }
    a += 0.5 * s.norm();
  }
  return a;
}

std::size_t SurfaceMesh::used_vertex_count() const {
  std::vector<char> used(vertices.size(), 0);
  for (const MeshFacet& f : facets) {
    for (int v : f.loop) used[v] = 1;
  }
  return static_cast<std::size_t>(std::count(used.begin(), used.end(), 1));
}

MeshAudit audit_mesh(const SurfaceMesh& mesh) {
  MeshAudit a;
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // forward, backward
  for (const MeshFacet& f : mesh.facets) {
    const std::size_t n = f.loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int u = f.loop[i], v = f.loop[(i + 1) % n];
      auto& e = edges[{std::min(u, v), std::max(u, v)}];
      if (u < v) ++e.first;
      else ++e.second;
    }
  }
  for (const auto& [key, c] : edges) {
    const int total = c.first + c.second;
    if (total == 1) ++a.boundary_edges;
    if (total > 2) ++a.nonmanifold_edges;
    if (total == 2 && c.first != 1) ++a.incoherent_edges;
  }
  a.vertices = mesh.used_vertex_count();
  a.edges = edges.size();
  a.facets = mesh.facets.size();
  a.euler_characteristic = static_cast<long>(a.vertices) -
                           static_cast<long>(a.edges) +
                           static_cast<long>(a.facets);
  return a;
}

namespace {

struct EdgeUse {
  int facet = 0;
  int pos = 0;   // loop index of the edge's first vertex
  int sign = 1;  // +1 if traversed from the lower vertex index
};

// Pairs the uses of a pinched edge so that each pair bounds one solid wedge.
// Empty if the uses are not consistently oriented.
std::vector<std::pair<int, int>> pair_around_edge(const SurfaceMesh& mesh,
                                                  const std::vector<EdgeUse>& uses, int lo,
                                                  int hi) {
  const Vec3 d = (mesh.vertices[hi] - mesh.vertices[lo]).normalized();
  const PlaneFrame frame(PlaneEq::from_point_normal(Vec3::Zero(), d));
  const Vec3 e1 = frame.u, e2 = frame.v;
  struct Around {
    double angle;
    int use;
    bool solid_ahead;
  };
  std::vector<Around> ring;
  for (std::size_t k = 0; k < uses.size(); ++k) {
    const Vec3 n = mesh.facet_normal(uses[k].facet);
    const Vec3 w = uses[k].sign * n.cross(d);  // into the facet
    ring.push_back({std::atan2(w.dot(e2), w.dot(e1)), static_cast<int>(k),
                    n.dot(d.cross(w)) < 0.0});
  }
  std::sort(ring.begin(), ring.end(), [](const Around& a, const Around& b) {
    return a.angle < b.angle || (a.angle == b.angle && a.use < b.use);
  });
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (!ring[i].solid_ahead) continue;
    const Around& next = ring[(i + 1) % ring.size()];
    if (next.solid_ahead || uses[ring[i].use].sign == uses[next.use].sign) return {};
    pairs.emplace_back(ring[i].use, next.use);
  }
  if (pairs.size() * 2 != uses.size()) return {};
  return pairs;
}

}  // namespace

SurfaceMesh split_nonmanifold(const SurfaceMesh& mesh) {
  std::vector<int> first(mesh.facets.size() + 1, 0);
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    first[f + 1] = first[f] + static_cast<int>(mesh.facets[f].loop.size());
  }
  auto corner = [&](int f, int pos) {
    const int n = static_cast<int>(mesh.facets[f].loop.size());
    return first[f] + (pos % n);
  };
  std::map<std::pair<int, int>, std::vector<EdgeUse>> edges;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const auto& loop = mesh.facets[f].loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int u = loop[i], v = loop[(i + 1) % loop.size()];
      edges[{std::min(u, v), std::max(u, v)}].push_back(
          {static_cast<int>(f), static_cast<int>(i), u < v ? 1 : -1});
    }
  }
  // Corners around one vertex are joined across every edge they share.
  UnionFind uf(first.back());
  auto glue = [&](const EdgeUse& a, const EdgeUse& b) {
    const int flip = a.sign == b.sign ? 0 : 1;
    uf.unite(corner(a.facet, a.pos), corner(b.facet, b.pos + flip));
    uf.unite(corner(a.facet, a.pos + 1), corner(b.facet, b.pos + 1 - flip));
  };
  bool pinched = false;
  for (const auto& [key, uses] : edges) {
    if (uses.size() == 2) {
      glue(uses[0], uses[1]);
    } else if (uses.size() > 2) {
      pinched = true;
      const auto pairs = pair_around_edge(mesh, uses, key.first, key.second);
      for (const auto& [a, b] : pairs) glue(uses[a], uses[b]);
    }
  }

  SurfaceMesh out = mesh;
  std::vector<int> owner(first.back(), -1);  // corner root -> vertex index
  std::vector<char> taken(mesh.vertices.size(), 0);
  std::size_t split = 0;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    auto& loop = out.facets[f].loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int root = uf.find(corner(static_cast<int>(f), static_cast<int>(i)));
      if (owner[root] < 0) {
        const int v = mesh.facets[f].loop[i];
        if (!taken[v]) {
          taken[v] = 1;
          owner[root] = v;
        } else {
          owner[root] = static_cast<int>(out.vertices.size());
          out.vertices.push_back(mesh.vertices[v]);
          ++split;
        }
      }
      loop[i] = owner[root];
    }
  }
  if (split > 0 || pinched) {
    log_debug("split {} vertex copies off pinched edges and vertices", split);
  }
  return out;
}

SurfaceMesh build_conforming_mesh(
    std::span<const std::pair<std::vector<Vec3>, int>> polygons,
    double weld_eps) {
  SurfaceMesh mesh;
  const double cell = std::max(weld_eps * 4.0, 1e-300);
  std::unordered_map<CellKey, std::vector<int>, CellKeyHash> grid;
  auto key_of = [&](const Vec3& p) {
    return CellKey{static_cast<long long>(std::floor(p.x() / cell)),
                   static_cast<long long>(std::floor(p.y() / cell)),
                   static_cast<long long>(std::floor(p.z() / cell))};
  };
  auto weld = [&](const Vec3& p) {
    const CellKey k = key_of(p);
    int best = -1;
    double best_d = weld_eps * weld_eps;
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == grid.end()) continue;
          for (int v : it->second) {
            const double d = (mesh.vertices[v] - p).squaredNorm();
            if (d <= best_d && (best < 0 || d < best_d || v < best)) {
              best_d = d;
              best = v;
            }
          }
        }
    if (best >= 0) return best;
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    grid[k].push_back(id);
    return id;
  };

  for (const auto& [poly, source] : polygons) {
    MeshFacet f;
    f.source = source;
    for (const Vec3& p : poly) f.loop.push_back(weld(p));
    drop_repeats(f.loop);
    if (f.loop.size() >= 3) mesh.facets.push_back(std::move(f));
  }

  // Insert vertices lying on the interior of facet edges.
  const KdTree tree(mesh.vertices);
  std::vector<int> candidates;
  for (MeshFacet& f : mesh.facets) {
    std::vector<int> out;
    const std::size_t n = f.loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = f.loop[i], b = f.loop[(i + 1) % n];
      out.push_back(a);
      const Vec3& pa = mesh.vertices[a];
      const Vec3& pb = mesh.vertices[b];
      const Vec3 lo = pa.cwiseMin(pb).array() - weld_eps;
      const Vec3 hi = pa.cwiseMax(pb).array() + weld_eps;
      candidates.clear();
      tree.box_query(lo, hi, candidates);
      const Vec3 ab = pb - pa;
      const double len2 = ab.squaredNorm();
      std::vector<std::pair<double, int>> inner;
      for (int w : candidates) {
        if (w == a || w == b) continue;
        const Vec3& pw = mesh.vertices[w];
        const double t = (pw - pa).dot(ab) / len2;
        if (t <= 0.0 || t >= 1.0) continue;
        if ((pa + t * ab - pw).norm() > weld_eps) continue;
        inner.emplace_back(t, w);
      }
      std::sort(inner.begin(), inner.end());
      for (const auto& [t, w] : inner) out.push_back(w);
    }
    drop_repeats(out);
    f.loop = std::move(out);
  }
  std::erase_if(mesh.facets, [](const MeshFacet& f) { return f.loop.size() < 3; });
  return mesh;
}

std::vector<std::array<int, 3>> triangulate(const SurfaceMesh& mesh,
                                            std::vector<int>* source_facet) {
  std::vector<std::array<int, 3>> tris;
  if (source_facet) source_facet->clear();
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const auto& loop = mesh.facets[f].loop;
    const std::size_t n = loop.size();
    auto emit = [&](int a, int b, int c) {
      tris.push_back({a, b, c});
      if (source_facet) source_facet->push_back(static_cast<int>(f));
    };
    if (n == 3) {
      emit(loop[0], loop[1], loop[2]);
      continue;
    }
    const Vec3 normal = mesh.facet_normal(f);
    if (normal.isZero()) continue;
    bool convex = true;
    for (std::size_t i = 0; i < n && convex; ++i) {
      const Vec3& a = mesh.vertices[loop[i]];
      const Vec3& b = mesh.vertices[loop[(i + 1) % n]];
      const Vec3& c = mesh.vertices[loop[(i + 2) % n]];
      if ((b - a).cross(c - b).dot(normal) < 0.0) convex = false;
    }
    if (!convex) {
      const PlaneFrame frame(PlaneEq::from_point_normal(mesh.vertices[loop[0]], normal));
      std::vector<Vec2> flat;
      for (int v : loop) flat.push_back(frame.to_2d(mesh.vertices[v]));
      try {
        for (const auto& t : constrained_delaunay_2d(flat, {})) {
          emit(loop[t[0]], loop[t[1]], loop[t[2]]);
        }
        continue;
      } catch (const InvalidLoops&) {
        // Fall back to a fan below.
      }
    }
    // Fan from the vertex that avoids zero-area triangles where possible.
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& p = mesh.vertices[loop[(i + n - 1) % n]];
      const Vec3& a = mesh.vertices[loop[i]];
      const Vec3& q = mesh.vertices[loop[(i + 1) % n]];
      if ((a - p).cross(q - a).dot(normal) > 0.0) {
        start = i;
        break;
      }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      emit(loop[start], loop[(start + i) % n], loop[(start + i + 1) % n]);
    }
  }
  return tris;
}

SurfaceMesh flipped(const SurfaceMesh& mesh) {
  SurfaceMesh out = mesh;
  for (MeshFacet& f : out.facets) std::reverse(f.loop.begin(), f.loop.end());
  return out;
}

SurfaceMesh cell_surface(const ConvexCell& cell) {
  SurfaceMesh mesh;
  mesh.vertices = cell.vertices();
  for (const CellFacet& f : cell.facets()) {
    mesh.facets.push_back({f.loop, cell.halfspaces()[f.halfspace].source});
  }
  return mesh;
}

}  // namespace compod
