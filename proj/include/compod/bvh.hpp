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

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "compod/mesh.hpp"

namespace compod {

/// Bounding-volume hierarchy over the triangles of a mesh.
class TriangleBvh {
 public:
  TriangleBvh() = default;
  explicit TriangleBvh(const SurfaceMesh& mesh);

  bool empty() const { return tris_.empty(); }
  std::size_t triangle_count() const { return tris_.size(); }

  /// Number of triangles crossed by the ray origin + t * dir, t > 0. Sets
  /// `grazing` when a hit lands within `edge_eps` (barycentric) of an edge or
  /// the origin lies on a triangle.
  int count_crossings(const Vec3& origin, const Vec3& dir, double edge_eps,
                      bool& grazing) const;

  /// Distance from p to the closest triangle.
  double distance(const Vec3& p) const;

  struct Hit {
    double distance = 0.0;
    Vec3 normal = Vec3::Zero();  // unit normal of the closest triangle's facet
  };
  Hit nearest(const Vec3& p) const;

 private:
  struct Node {
    Vec3 lo, hi;
    int left = -1, right = -1;
    int begin = 0, end = 0;
  };
  int build(int begin, int end);

  std::vector<std::array<Vec3, 3>> tris_;
  std::vector<Vec3> normals_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Inside test for closed meshes by ray-crossing parity along a fixed
/// skewed direction; grazing rays are re-cast with a deterministic jitter.
class InsideTester {
 public:
  explicit InsideTester(const SurfaceMesh& mesh);
  bool inside(const Vec3& p) const;

 private:
  TriangleBvh bvh_;
  double edge_eps_ = 1e-9;
};

/// Exact distance from p to a triangle.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

}  // namespace compod
