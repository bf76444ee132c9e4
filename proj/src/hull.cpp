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

#include "compod/hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "compod/error.hpp"

namespace compod {

namespace {

struct Tri {
  int v[3];
  Vec3 normal;  // unit, outward
  double offset;
  bool alive = true;

  double distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

Tri make_tri(int a, int b, int c, std::span<const Vec3> pts) {
  Tri t{{a, b, c}, Vec3::Zero(), 0.0};
  const Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double len = n.norm();
  t.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  t.offset = -t.normal.dot(pts[a]);
  return t;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

ConvexCell convex_hull_3d(std::span<const Vec3> pts,
                          const ToleranceContext& tol) {
  const double eps = tol.eps_abs();
  const int n = static_cast<int>(pts.size());
  if (n < 4) throw DegenerateInput("3D hull needs at least 4 points");

  // Initial simplex from extreme points.
  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    if (pts[i].x() < pts[i0].x()) i0 = i;
  }
  int i1 = i0;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).squaredNorm();
    if (d > best) best = d, i1 = i;
  }
  if (std::sqrt(best) <= eps) throw DegenerateInput("points coincide");
  int i2 = i1;
  best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = point_segment_distance(pts[i], pts[i0], pts[i1]);
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps) throw DegenerateInput("points are collinear");
  const Tri base = make_tri(i0, i1, i2, pts);
  int i3 = i2;
  best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(base.distance(pts[i]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) throw DegenerateInput("points are coplanar");

  std::vector<Tri> tris;
  if (base.distance(pts[i3]) > 0.0) {
    tris.push_back(make_tri(i0, i2, i1, pts));
    tris.push_back(make_tri(i0, i1, i3, pts));
    tris.push_back(make_tri(i1, i2, i3, pts));
    tris.push_back(make_tri(i2, i0, i3, pts));
  } else {
    tris.push_back(make_tri(i0, i1, i2, pts));
    tris.push_back(make_tri(i0, i3, i1, pts));
    tris.push_back(make_tri(i1, i3, i2, pts));
    tris.push_back(make_tri(i2, i3, i0, pts));
  }

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<int> visible;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (tris[t].alive && tris[t].distance(pts[p]) > eps) visible.push_back(t);
    }
    if (visible.empty()) continue;
    std::set<std::pair<int, int>> edges;
    for (int t : visible) {
      for (int k = 0; k < 3; ++k) {
        edges.emplace(tris[t].v[k], tris[t].v[(k + 1) % 3]);
      }
    }
    for (int t : visible) {
      tris[t].alive = false;
      for (int k = 0; k < 3; ++k) {
        const int a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
        if (!edges.count({b, a})) tris.push_back(make_tri(a, b, p, pts));
      }
    }
  }

  std::vector<Tri> live;
  for (const Tri& t : tris) {
    if (t.alive) live.push_back(t);
  }

  // Merge coplanar neighbours into facets.
  const int m = static_cast<int>(live.size());
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::map<std::pair<int, int>, int> edge_owner;
  for (int t = 0; t < m; ++t) {
    for (int k = 0; k < 3; ++k) {
      edge_owner[{live[t].v[k], live[t].v[(k + 1) % 3]}] = t;
    }
  }
  for (int t = 0; t < m; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = live[t].v[k], b = live[t].v[(k + 1) % 3];
      auto it = edge_owner.find({b, a});
      if (it == edge_owner.end()) continue;
      const Tri& o = live[it->second];
      int opposite = o.v[0];
      for (int q : o.v) {
        if (q != a && q != b) opposite = q;
      }
      if (std::abs(live[t].distance(pts[opposite])) <= eps &&
          live[t].normal.dot(o.normal) > 0.0) {
        parent[find_root(parent, t)] = find_root(parent, it->second);
      }
    }
  }
  std::map<int, std::vector<int>> groups;
  for (int t = 0; t < m; ++t) groups[find_root(parent, t)].push_back(t);

  std::vector<HalfSpace> hs;
  std::vector<CellFacet> facets;
  std::vector<int> remap(n, -1);
  std::vector<Vec3> verts;
  for (const auto& [root, members] : groups) {
    Vec3 area_n = Vec3::Zero();
    std::set<int> vset;
    for (int t : members) {
      const Tri& tri = live[t];
      area_n += (pts[tri.v[1]] - pts[tri.v[0]]).cross(pts[tri.v[2]] - pts[tri.v[0]]);
      vset.insert(tri.v, tri.v + 3);
    }
    const Vec3 normal = area_n.normalized();
    double offset = 0.0;
    for (int v : vset) offset -= normal.dot(pts[v]);
    offset /= static_cast<double>(vset.size());
    const PlaneEq plane{normal, offset};
    const PlaneFrame frame(plane);
    std::vector<int> ids(vset.begin(), vset.end());
    std::vector<Vec2> flat;
    for (int v : ids) flat.push_back(frame.to_2d(pts[v]));
    std::vector<int> loop_local;
    try {
      loop_local = convex_hull_2d_indices(flat, 0.0);
    } catch (const DegenerateInput&) {
      continue;
    }
    CellFacet f;
    f.halfspace = static_cast<int>(hs.size());
    for (int k : loop_local) {
      const int v = ids[k];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(verts.size());
        verts.push_back(pts[v]);
      }
      f.loop.push_back(remap[v]);
    }
    hs.push_back({plane, Side::Negative, kNoSource});
    facets.push_back(std::move(f));
  }
  ConvexCell cell =
      ConvexCell::from_parts(std::move(hs), std::move(verts), std::move(facets));
  if (cell.vertices().size() < 4 || !(cell.volume() > 0.0)) {
    throw DegenerateInput("hull has no volume");
  }
  return cell;
}

}  // namespace compod
