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

#include "compod/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace compod {

namespace {

constexpr int kLeafTriangles = 4;

bool ray_box(const Vec3& o, const Vec3& inv, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double tn = (lo[a] - o[a]) * inv[a];
    double tf = (hi[a] - o[a]) * inv[a];
    if (std::isnan(tn) || std::isnan(tf)) {
      // Ray parallel to the slab and on its boundary.
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    if (tn > tf) std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t0 > t1) return false;
  }
  return true;
}

double box_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = std::max({lo[a] - q[a], 0.0, q[a] - hi[a]});
    d += e * e;
  }
  return d;
}

}  // namespace

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  // Closest point by Voronoi regions (Ericson, Real-Time Collision Detection).
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

TriangleBvh::TriangleBvh(const SurfaceMesh& mesh) {
  std::vector<int> source;
  const auto tris = triangulate(mesh, &source);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    const auto& t = tris[i];
    tris_.push_back({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]});
    normals_.push_back(mesh.facet_normal(source[i]));
  }
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!tris_.empty()) build(0, static_cast<int>(tris_.size()));
}

int TriangleBvh::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (int i = begin; i < end; ++i) {
    for (const Vec3& v : tris_[order_[i]]) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafTriangles) return id;
  int axis;
  (hi - lo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  auto centroid = [&](int t) {
    return tris_[t][0][axis] + tris_[t][1][axis] + tris_[t][2][axis];
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = centroid(a), cb = centroid(b);
                     return ca < cb || (ca == cb && a < b);
                   });
  const int l = build(begin, mid);
  const int r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

int TriangleBvh::count_crossings(const Vec3& o, const Vec3& dir, double edge_eps,
                                 bool& grazing) const {
  grazing = false;
  if (nodes_.empty()) return 0;
  const Vec3 inv(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
  int count = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (!ray_box(o, inv, n.lo, n.hi)) continue;
    if (n.left >= 0) {
      stack.push_back(n.left);
      stack.push_back(n.right);
      continue;
    }
    for (int i = n.begin; i < n.end; ++i) {
      const auto& t = tris_[order_[i]];
      // Moeller-Trumbore.
      const Vec3 e1 = t[1] - t[0], e2 = t[2] - t[0];
      const Vec3 pv = dir.cross(e2);
      const double det = e1.dot(pv);
      const double scale = e1.norm() * e2.norm() * dir.norm();
      if (std::abs(det) <= 1e-14 * scale) {
        // Ray parallel to the triangle: only matters if it lies in its plane.
        const Vec3 nrm = e1.cross(e2);
        if (std::abs(nrm.dot(o - t[0])) <= 1e-12 * nrm.norm() * (1.0 + (o - t[0]).norm())) {
          grazing = true;
        }
        continue;
      }
      const double inv_det = 1.0 / det;
      const Vec3 s = o - t[0];
      const double u = s.dot(pv) * inv_det;
      if (u < -edge_eps || u > 1.0 + edge_eps) continue;
      const Vec3 q = s.cross(e1);
      const double v = dir.dot(q) * inv_det;
      if (v < -edge_eps || u + v > 1.0 + edge_eps) continue;
      const double tt = e2.dot(q) * inv_det;
      const double tscale = 1e-12 * (1.0 + s.norm());
      if (tt < -tscale) continue;
      if (tt <= tscale) {
        grazing = true;  // origin on the surface
        continue;
      }
      if (u < edge_eps || v < edge_eps || u + v > 1.0 - edge_eps) grazing = true;
      ++count;
    }
  }
  return count;
}

double TriangleBvh::distance(const Vec3& p) const { return nearest(p).distance; }

TriangleBvh::Hit TriangleBvh::nearest(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  int best_tri = -1;
  if (nodes_.empty()) return {best, Vec3::Zero()};
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(p, n.lo, n.hi) > best * best) continue;
    if (n.left >= 0) {
      const double dl = box_distance2(p, nodes_[n.left].lo, nodes_[n.left].hi);
      const double dr = box_distance2(p, nodes_[n.right].lo, nodes_[n.right].hi);
      if (dl < dr) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      } else {
        stack.push_back(n.left);
        stack.push_back(n.right);
      }
      continue;
    }
    for (int i = n.begin; i < n.end; ++i) {
      const auto& t = tris_[order_[i]];
      const double d = point_triangle_distance(p, t[0], t[1], t[2]);
      if (d < best || (d == best && order_[i] < best_tri)) {
        best = d;
        best_tri = order_[i];
      }
    }
  }
  return {best, normals_[best_tri]};
}

InsideTester::InsideTester(const SurfaceMesh& mesh) : bvh_(mesh) {}

bool InsideTester::inside(const Vec3& p) const {
  Vec3 dir = Vec3(1.0, M_PI / 1000.0, M_E / 1000.0).normalized();
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g;
  for (int attempt = 0; attempt < 16; ++attempt) {
    bool grazing = false;
    const int c = bvh_.count_crossings(p, dir, edge_eps_, grazing);
    if (!grazing) return (c % 2) == 1;
    dir = (dir + 0.05 * Vec3(g(rng), g(rng), g(rng))).normalized();
  }
  bool grazing = false;
  return (bvh_.count_crossings(p, dir, edge_eps_, grazing) % 2) == 1;
}

}  // namespace compod
