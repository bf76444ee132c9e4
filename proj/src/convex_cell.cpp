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

#include "compod/convex_cell.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "compod/error.hpp"

namespace compod {

namespace {

double volume_from_facets(const std::vector<Vec3>& vertices,
                          const std::vector<CellFacet>& facets) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : vertices) c += v;
  c /= static_cast<double>(vertices.size());
  double six_v = 0.0;
  for (const CellFacet& f : facets) {
    const Vec3 a = vertices[f.loop[0]] - c;
    for (std::size_t i = 1; i + 1 < f.loop.size(); ++i) {
      const Vec3 b = vertices[f.loop[i]] - c;
      const Vec3 d = vertices[f.loop[i + 1]] - c;
      six_v += a.dot(b.cross(d));
    }
  }
  return six_v / 6.0;
}

}  // namespace

void order_loop_ccw(std::vector<int>& loop, std::span<const Vec3> vertices,
                    const Vec3& normal) {
  if (loop.size() < 3) return;
  Vec3 c = Vec3::Zero();
  for (int i : loop) c += vertices[i];
  c /= static_cast<double>(loop.size());
  const PlaneFrame frame(PlaneEq::from_point_normal(c, normal), c);
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(loop.size());
  for (int i : loop) {
    const Vec2 q = frame.to_2d(vertices[i]);
    keyed.emplace_back(std::atan2(q.y(), q.x()), i);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t k = 0; k < keyed.size(); ++k) loop[k] = keyed[k].second;
}

ConvexCell ConvexCell::box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                   (i & 4) ? hi.z() : lo.z());
  }
  std::vector<HalfSpace> hs;
  std::vector<CellFacet> facets;
  for (int axis = 0; axis < 3; ++axis) {
    for (int upper = 0; upper < 2; ++upper) {
      Vec3 n = Vec3::Zero();
      n[axis] = upper ? 1.0 : -1.0;
      const double d = upper ? -hi[axis] : lo[axis];
      const int source = kBoxSourceBase - (2 * axis + upper);
      CellFacet f;
      f.halfspace = static_cast<int>(hs.size());
      for (int i = 0; i < 8; ++i) {
        if (((i >> axis) & 1) == upper) f.loop.push_back(i);
      }
      order_loop_ccw(f.loop, v, n);
      hs.push_back({PlaneEq{n, d}, Side::Negative, source});
      facets.push_back(std::move(f));
    }
  }
  return from_parts(std::move(hs), std::move(v), std::move(facets));
}

ConvexCell ConvexCell::from_parts(std::vector<HalfSpace> halfspaces,
                                  std::vector<Vec3> vertices,
                                  std::vector<CellFacet> facets) {
  ConvexCell c;
  c.halfspaces_ = std::move(halfspaces);
  c.vertices_ = std::move(vertices);
  c.facets_ = std::move(facets);
  c.volume_ = c.vertices_.size() >= 4 ? volume_from_facets(c.vertices_, c.facets_)
                                      : 0.0;
  return c;
}

Vec3 ConvexCell::vertex_centroid() const {
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : vertices_) c += v;
  return vertices_.empty() ? c : Vec3(c / static_cast<double>(vertices_.size()));
}

std::vector<Vec3> ConvexCell::facet_polygon(std::size_t facet) const {
  std::vector<Vec3> out;
  for (int i : facets_[facet].loop) out.push_back(vertices_[i]);
  return out;
}

bool ConvexCell::contains(const Vec3& p, double eps) const {
  for (const HalfSpace& h : halfspaces_) {
    if (signed_distance(h.outward_plane(), p) > eps) return false;
  }
  return !vertices_.empty();
}

bool ConvexCell::crossed_by(const PlaneEq& plane, double eps) const {
  bool neg = false, pos = false;
  for (const Vec3& v : vertices_) {
    const double s = signed_distance(plane, v);
    neg |= s < -eps;
    pos |= s > eps;
    if (neg && pos) return true;
  }
  return false;
}

bool ConvexCell::touches_box() const {
  for (const HalfSpace& h : halfspaces_) {
    if (is_box_source(h.source)) return true;
  }
  return false;
}

double cell_volume(const ConvexCell& cell) {
  if (cell.vertices().size() < 4) {
    throw DegenerateCell("cell has fewer than 4 vertices");
  }
  return cell.volume();
}

SplitResult split_cell(const ConvexCell& cell, const PlaneEq& plane,
                       const ToleranceContext& tol, int source) {
  SplitResult result;
  const double eps = tol.eps_abs();
  const auto& verts = cell.vertices();
  const std::size_t n = verts.size();

  std::vector<double> s(n);
  std::vector<int> side(n);
  bool any_neg = false, any_pos = false;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = signed_distance(plane, verts[i]);
    side[i] = s[i] > eps ? 1 : (s[i] < -eps ? -1 : 0);
    any_neg |= side[i] < 0;
    any_pos |= side[i] > 0;
  }
  if (!any_neg || !any_pos) {
    result.status = SplitStatus::NoIntersection;
    return result;
  }

  // Parent vertex / edge-crossing ids are mapped into per-child pools.
  std::vector<Vec3> neg_v, pos_v;
  std::vector<int> neg_map(n, -1), pos_map(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (side[i] <= 0) {
      neg_map[i] = static_cast<int>(neg_v.size());
      neg_v.push_back(verts[i]);
    }
    if (side[i] >= 0) {
      pos_map[i] = static_cast<int>(pos_v.size());
      pos_v.push_back(verts[i]);
    }
  }
  std::vector<std::pair<int, int>> cut_ids;  // (neg id, pos id) on the plane
  for (std::size_t i = 0; i < n; ++i) {
    if (side[i] == 0) cut_ids.emplace_back(neg_map[i], pos_map[i]);
  }
  std::unordered_map<std::uint64_t, std::pair<int, int>> crossing;
  auto crossing_vertex = [&](int i, int j) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(std::min(i, j)) << 32) |
        static_cast<std::uint32_t>(std::max(i, j));
    auto it = crossing.find(key);
    if (it != crossing.end()) return it->second;
    // Interpolate from the lower index so both facets sharing the edge get
    // the same coordinates.
    const int a = std::min(i, j), b = std::max(i, j);
    const double t = s[a] / (s[a] - s[b]);
    const Vec3 x = verts[a] + t * (verts[b] - verts[a]);
    const std::pair<int, int> ids(static_cast<int>(neg_v.size()),
                                  static_cast<int>(pos_v.size()));
    neg_v.push_back(x);
    pos_v.push_back(x);
    cut_ids.push_back(ids);
    crossing.emplace(key, ids);
    return ids;
  };

  const double min_area = eps * eps;
  std::vector<HalfSpace> neg_h, pos_h;
  std::vector<CellFacet> neg_f, pos_f;
  for (const CellFacet& f : cell.facets()) {
    CellFacet nf, pf;
    const std::size_t m = f.loop.size();
    for (std::size_t k = 0; k < m; ++k) {
      const int i = f.loop[k];
      const int j = f.loop[(k + 1) % m];
      if (side[i] <= 0) nf.loop.push_back(neg_map[i]);
      if (side[i] >= 0) pf.loop.push_back(pos_map[i]);
      if (side[i] * side[j] < 0) {
        const auto ids = crossing_vertex(i, j);
        nf.loop.push_back(ids.first);
        pf.loop.push_back(ids.second);
      }
    }
    auto area_of = [](const CellFacet& cf, const std::vector<Vec3>& pool) {
      std::vector<Vec3> poly;
      for (int i : cf.loop) poly.push_back(pool[i]);
      return polygon_area(poly);
    };
    if (nf.loop.size() >= 3 && area_of(nf, neg_v) > min_area) {
      nf.halfspace = static_cast<int>(neg_h.size());
      neg_h.push_back(cell.halfspaces()[f.halfspace]);
      neg_f.push_back(std::move(nf));
    }
    if (pf.loop.size() >= 3 && area_of(pf, pos_v) > min_area) {
      pf.halfspace = static_cast<int>(pos_h.size());
      pos_h.push_back(cell.halfspaces()[f.halfspace]);
      pos_f.push_back(std::move(pf));
    }
  }

  // Cut polygon: counter-clockwise around plane.n, outward for the negative
  // child; reversed for the positive child.
  std::vector<int> neg_loop;
  std::vector<int> to_pos(neg_v.size(), -1);
  for (const auto& [a, b] : cut_ids) {
    neg_loop.push_back(a);
    to_pos[a] = b;
  }
  order_loop_ccw(neg_loop, neg_v, plane.n);
  for (const int i : neg_loop) result.interface.push_back(neg_v[i]);
  if (neg_loop.size() < 3 || polygon_area(result.interface) < min_area) {
    result.status = SplitStatus::DegenerateCut;
    result.interface.clear();
    return result;
  }
  {
    CellFacet nf;
    nf.halfspace = static_cast<int>(neg_h.size());
    nf.loop = neg_loop;
    neg_h.push_back({plane, Side::Negative, source});
    neg_f.push_back(std::move(nf));
    CellFacet pf;
    pf.halfspace = static_cast<int>(pos_h.size());
    for (auto it = neg_loop.rbegin(); it != neg_loop.rend(); ++it) {
      pf.loop.push_back(to_pos[*it]);
    }
    pos_h.push_back({plane, Side::Positive, source});
    pos_f.push_back(std::move(pf));
  }

  // Drop pool entries no facet references.
  auto compact = [](std::vector<Vec3>& pool, std::vector<CellFacet>& facets) {
    std::vector<int> remap(pool.size(), -1);
    std::vector<Vec3> out;
    for (CellFacet& f : facets) {
      for (int& i : f.loop) {
        if (remap[i] < 0) {
          remap[i] = static_cast<int>(out.size());
          out.push_back(pool[i]);
        }
        i = remap[i];
      }
    }
    pool = std::move(out);
  };
  compact(neg_v, neg_f);
  compact(pos_v, pos_f);

  result.negative = ConvexCell::from_parts(std::move(neg_h), std::move(neg_v),
                                           std::move(neg_f));
  result.positive = ConvexCell::from_parts(std::move(pos_h), std::move(pos_v),
                                           std::move(pos_f));
  if (result.negative.vertices().size() < 4 ||
      result.positive.vertices().size() < 4 || !(result.negative.volume() > 0) ||
      !(result.positive.volume() > 0)) {
    result.status = SplitStatus::DegenerateCut;
    result.negative = {};
    result.positive = {};
    result.interface.clear();
    return result;
  }
  result.status = SplitStatus::Ok;
  return result;
}

}  // namespace compod
