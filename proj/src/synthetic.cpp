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

#include "compod/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace compod {

namespace {

struct Rect {
  std::array<Vec3, 4> corners;  // counter-clockwise seen from outside
  double area;
};

struct FacePlane {
  int axis;
  double offset;
  int sign;
  auto operator<=>(const FacePlane&) const = default;
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

bool boxes_touch(const Box& a, const Box& b) {
  return (a.lo.array() <= b.hi.array()).all() && (b.lo.array() <= a.hi.array()).all();
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Boundary rectangles of a union of boxes, from the grid of box coordinates.
void union_boundary(const std::vector<Box>& boxes,
                    std::map<FacePlane, std::vector<Rect>>& faces) {
  std::array<std::vector<double>, 3> coords;
  for (const Box& b : boxes) {
    for (int a = 0; a < 3; ++a) {
      coords[a].push_back(b.lo[a]);
      coords[a].push_back(b.hi[a]);
    }
  }
  for (auto& c : coords) c = unique_sorted(std::move(c));
  const int nx = static_cast<int>(coords[0].size()) - 1;
  const int ny = static_cast<int>(coords[1].size()) - 1;
  const int nz = static_cast<int>(coords[2].size()) - 1;
  std::vector<char> inside(static_cast<std::size_t>(nx) * ny * nz, 0);
  auto at = [&](int i, int j, int k) -> char {
    if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return 0;
    return inside[(static_cast<std::size_t>(k) * ny + j) * nx + i];
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec3 c(0.5 * (coords[0][i] + coords[0][i + 1]),
                     0.5 * (coords[1][j] + coords[1][j + 1]),
                     0.5 * (coords[2][k] + coords[2][k + 1]));
        for (const Box& b : boxes) {
          if ((c.array() > b.lo.array()).all() && (c.array() < b.hi.array()).all()) {
            inside[(static_cast<std::size_t>(k) * ny + j) * nx + i] = 1;
            break;
          }
        }
      }
  const std::array<int, 3> dims{nx, ny, nz};
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int a = 0; a <= dims[axis]; ++a)
      for (int bu = 0; bu < dims[u]; ++bu)
        for (int bv = 0; bv < dims[v]; ++bv) {
          std::array<int, 3> lo_cell{}, hi_cell{};
          lo_cell[axis] = a - 1;
          hi_cell[axis] = a;
          lo_cell[u] = hi_cell[u] = bu;
          lo_cell[v] = hi_cell[v] = bv;
          const char below = at(lo_cell[0], lo_cell[1], lo_cell[2]);
          const char above = at(hi_cell[0], hi_cell[1], hi_cell[2]);
          if (below == above) continue;
          const int sign = below ? 1 : -1;
          const double off = coords[axis][a];
          const double u0 = coords[u][bu], u1 = coords[u][bu + 1];
          const double v0 = coords[v][bv], v1 = coords[v][bv + 1];
          auto corner = [&](double cu, double cv) {
            Vec3 p;
            p[axis] = off;
            p[u] = cu;
            p[v] = cv;
            return p;
          };
          // (u, v, axis) is right-handed, so this order faces +axis.
          Rect r{{corner(u0, v0), corner(u1, v0), corner(u1, v1), corner(u0, v1)},
                 (u1 - u0) * (v1 - v0)};
          if (sign < 0) std::reverse(r.corners.begin(), r.corners.end());
          faces[{axis, off, sign}].push_back(r);
        }
  }
}

}  // namespace

Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

PointCloud box_surface_cloud(const Box& box, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Vec3 ext = box.hi - box.lo;
  std::array<double, 6> area{};
  for (int f = 0; f < 6; ++f) {
    const int axis = f / 2;
    area[f] = ext[(axis + 1) % 3] * ext[(axis + 2) % 3];
  }
  std::discrete_distribution<int> pick(area.begin(), area.end());
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int f = pick(rng);
    const int axis = f / 2;
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = box.lo[a] + uni(rng) * ext[a];
    Vec3 nrm = Vec3::Zero();
    if (f % 2 == 0) {
      p[axis] = box.lo[axis];
      nrm[axis] = -1.0;
    } else {
      p[axis] = box.hi[axis];
      nrm[axis] = 1.0;
    }
    cloud.points.push_back(p);
    cloud.normals.push_back(nrm);
  }
  return cloud;
}

SyntheticScene box_union_scene(const std::vector<Box>& boxes, double density,
                               int min_points, std::uint64_t seed,
                               const Eigen::Matrix3d& rotation) {
  // Group touching boxes so each grid stays small.
  std::vector<int> parent(boxes.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (boxes_touch(boxes[i], boxes[j])) {
        parent[find_root(parent, static_cast<int>(i))] =
            find_root(parent, static_cast<int>(j));
      }
  std::map<int, std::vector<Box>> groups;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    groups[find_root(parent, static_cast<int>(i))].push_back(boxes[i]);
  }
  std::map<FacePlane, std::vector<Rect>> faces;
  for (const auto& [root, group] : groups) union_boundary(group, faces);

  SyntheticScene scene;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::pair<std::vector<Vec3>, int>> polys;
  double diag = 0.0;
  {
    Vec3 lo = boxes.front().lo, hi = boxes.front().hi;
    for (const Box& b : boxes) {
      lo = lo.cwiseMin(b.lo);
      hi = hi.cwiseMax(b.hi);
    }
    diag = (hi - lo).norm();
  }
  for (const auto& [key, rects] : faces) {
    PlanarPrimitive prim;
    prim.id = static_cast<int>(scene.primitives.size());
    Vec3 n = Vec3::Zero();
    n[key.axis] = key.sign;
    const Vec3 rn = rotation * n;
    prim.plane = {rn, -key.sign * key.offset};
    prim.orientation = 1;
    std::vector<double> areas;
    double total = 0.0;
    for (const Rect& r : rects) {
      areas.push_back(r.area);
      total += r.area;
      std::vector<Vec3> loop;
      for (const Vec3& c : r.corners) loop.push_back(rotation * c);
      polys.emplace_back(std::move(loop), prim.id);
    }
    const auto count = std::max<std::size_t>(
        static_cast<std::size_t>(min_points),
        static_cast<std::size_t>(std::llround(density * total)));
    std::discrete_distribution<int> pick(areas.begin(), areas.end());
    for (std::size_t s = 0; s < count; ++s) {
      const Rect& r = rects[pick(rng)];
      const double a = uni(rng), b = uni(rng);
      const Vec3 p = r.corners[0] + a * (r.corners[1] - r.corners[0]) +
                     b * (r.corners[3] - r.corners[0]);
      prim.inliers.push_back(static_cast<int>(scene.cloud.points.size()));
      scene.cloud.points.push_back(rotation * p);
      scene.cloud.normals.push_back(rn);
    }
    scene.primitives.push_back(std::move(prim));
  }
  scene.ground_truth = build_conforming_mesh(polys, 1e-9 * diag);
  return scene;
}

SyntheticScene random_box_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (;;) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<Box> boxes;
    for (int i = 0; i < n; ++i) {
      Vec3 c(uni(rng), uni(rng), uni(rng));
      Vec3 h(0.08 + 0.22 * uni(rng), 0.08 + 0.22 * uni(rng), 0.08 + 0.22 * uni(rng));
      boxes.push_back({c - h, c + h});
    }
    const Eigen::Matrix3d rot =
        (seed % 2 == 1) ? random_rotation(rng()) : Eigen::Matrix3d::Identity();
    SyntheticScene s = box_union_scene(boxes, 3000.0, 30, rng(), rot);
    const auto k = s.primitives.size();
    if (k >= 10 && k <= 50) return s;
  }
}

SyntheticScene scattered_box_scene(int box_count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int m = std::max(1, static_cast<int>(std::ceil(std::cbrt(box_count))));
  std::vector<Box> boxes;
  for (int i = 0; i < box_count; ++i) {
    const Vec3 slot(i % m, (i / m) % m, i / (m * m));
    Vec3 h;
    for (int a = 0; a < 3; ++a) h[a] = 0.15 + 0.25 * uni(rng);
    Vec3 c;
    for (int a = 0; a < 3; ++a) c[a] = slot[a] + 0.5 + (0.45 - h[a]) * (2 * uni(rng) - 1);
    boxes.push_back({c - h, c + h});
  }
  return box_union_scene(boxes, 150.0, 30, rng());
}

SyntheticScene l_prism_scene(std::uint64_t seed) {
  const std::vector<Box> boxes{{Vec3(0, 0, 0), Vec3(2, 1, 1)},
                               {Vec3(0, 1, 0), Vec3(1, 2, 1)}};
  return box_union_scene(boxes, 2000.0, 30, seed);
}

}  // namespace compod
