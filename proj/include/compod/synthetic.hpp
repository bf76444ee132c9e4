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

#include <cstdint>
#include <vector>

#include "compod/mesh.hpp"
#include "compod/primitives.hpp"

// Synthetic scenes with known primitives and ground truth, used by the
// tests, the acceptance suite and `compod synth`.

namespace compod {

struct Box {
  Vec3 lo, hi;
};

struct SyntheticScene {
  PointCloud cloud;  // with exact outward normals
  std::vector<PlanarPrimitive> primitives;
  SurfaceMesh ground_truth;  // closed, outward oriented
};

/// `n` points uniform on the surface of the box [lo, hi].
PointCloud box_surface_cloud(const Box& box, std::size_t n, std::uint64_t seed);

/// Union of axis-aligned boxes, optionally rigidly rotated. One primitive per
/// distinct (axis, offset, direction) boundary plane. Each primitive gets
/// max(min_points, density * area) samples.
SyntheticScene box_union_scene(const std::vector<Box>& boxes, double density,
                               int min_points, std::uint64_t seed,
                               const Eigen::Matrix3d& rotation =
                                   Eigen::Matrix3d::Identity());

/// 2 to 8 overlapping random boxes, randomly rotated, with 10 to 50
/// primitives.
SyntheticScene random_box_scene(std::uint64_t seed);

/// Disjoint boxes of random sizes on a lattice; 6 primitives per box.
SyntheticScene scattered_box_scene(int box_count, std::uint64_t seed);

/// L-shaped prism: [0,2]x[0,1]x[0,1] joined with [0,1]x[1,2]x[0,1].
SyntheticScene l_prism_scene(std::uint64_t seed);

Eigen::Matrix3d random_rotation(std::uint64_t seed);

}  // namespace compod
