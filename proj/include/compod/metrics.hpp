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
#include <limits>
#include <string>
#include <vector>

#include "compod/extraction.hpp"
#include "compod/mesh.hpp"

namespace compod {

struct SampleSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<int> facets;  // source facet per sample
  std::uint64_t seed = 0;
};

/// Uniform-by-area surface samples. Throws EmptyMesh.
SampleSet sample_surface(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed);

struct MetricOptions {
  int threads = 1;
  /// Distances to the other mesh's triangles instead of its samples.
  bool exact = false;
};

double chamfer(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
               std::uint64_t seed, const MetricOptions& opt = {});
double hausdorff(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
                 std::uint64_t seed, const MetricOptions& opt = {});
double normal_consistency(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
                          std::uint64_t seed, const MetricOptions& opt = {});

struct SurfaceDistances {
  double cd = 0.0, hd = 0.0, nc = 0.0;
};
/// All three from one pair of sample sets.
SurfaceDistances compare_surfaces(const SurfaceMesh& a, const SurfaceMesh& b,
                                  std::size_t n, std::uint64_t seed,
                                  const MetricOptions& opt = {});

/// Monte-Carlo IoU over the joint bounding box. Throws OpenMesh.
double volumetric_iou(const ConvexDecomposition& a, const SurfaceMesh& b,
                      std::size_t n, std::uint64_t seed, int threads = 1);
double volumetric_iou(const SurfaceMesh& a, const SurfaceMesh& b, std::size_t n,
                      std::uint64_t seed, int threads = 1);

struct Report {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::size_t cells = 0;           // |C|
  std::size_t surface_facets = 0;  // |F_S|
  std::size_t volume_cells = 0;    // |C_V|
  std::size_t volume_facets = 0;   // |F_V|
  double cd = kUnset, hd = kUnset, nc = kUnset, iou = kUnset;
  // Timings are unset unless asked for, so reports stay reproducible.
  double time_s = kUnset;
  double peak_mem_mb = kUnset;
  std::uint64_t seed = 0;
  std::string config_hash;
};

Report complexity_report(const SurfaceMesh* surface, const ConvexDecomposition* decomp,
                         std::size_t cells, double time_s, double peak_mem_mb);

/// Fixed key order, 17 significant digits, null for unset metrics.
std::string report_to_json(const Report& r);
Report report_from_json(const std::string& text);
std::string report_table(const Report& r);

}  // namespace compod
