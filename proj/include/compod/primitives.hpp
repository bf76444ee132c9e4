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

#include <span>
#include <vector>

#include "compod/convex_cell.hpp"
#include "compod/geometry.hpp"

namespace compod {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty or same length as points

  bool has_normals() const {
    return !normals.empty() && normals.size() == points.size();
  }
  /// Throws ValidationError on non-finite coordinates or non-unit normals.
  void validate() const;
};

/// A supporting plane and the cloud points it was fitted to.
struct PlanarPrimitive {
  int id = 0;
  PlaneEq plane;
  std::vector<int> inliers;
  /// Sign of the consensus inlier normal relative to plane.n; 0 if unknown.
  int orientation = 0;
};

struct DetectionConfig {
  double fit_tol_frac = 0.008;  // of the bounding-box diagonal
  int min_inliers = 30;
  int knn = 16;
  double max_angle_deg = 20.0;

  void validate() const;
};

double bbox_diagonal(std::span<const Vec3> points);

/// PCA normals over k nearest neighbours, oriented away from the centroid.
/// `curvature` receives lambda_min / (lambda_0 + lambda_1 + lambda_2).
std::vector<Vec3> estimate_normals(std::span<const Vec3> points, int knn,
                                   std::vector<double>* curvature = nullptr);

/// Seeded region growing (lowest-curvature seeds first). Output is sorted by
/// descending inlier count and ids are assigned in that order. Estimates
/// normals when the cloud has none.
std::vector<PlanarPrimitive> detect_planes(const PointCloud& cloud,
                                           const DetectionConfig& cfg);

/// Axis-aligned box around the points, grown by padding_frac * diagonal on
/// each side. Zero-extent axes are inflated to an eps_abs slab.
ConvexCell dilated_bbox(std::span<const Vec3> points, double padding_frac);

/// Checks inlier indices against the cloud and non-emptiness.
void validate_primitives(std::span<const PlanarPrimitive> primitives,
                         std::size_t cloud_size);

/// Convex hull of the inliers projected onto the plane, counter-clockwise
/// around plane.n. Throws DegenerateInput if the inliers are collinear.
std::vector<Vec3> primitive_hull(const PlanarPrimitive& primitive,
                                 const PointCloud& cloud, double eps);

/// All inlier coordinates of the primitives, in primitive order.
std::vector<Vec3> gather_inliers(std::span<const PlanarPrimitive> primitives,
                                 const PointCloud& cloud);

}  // namespace compod
