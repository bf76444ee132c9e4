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

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compod/arrangement.hpp"
#include "compod/labelling.hpp"
#include "compod/mesh.hpp"

namespace compod {

/// Interface facets between inside and outside leaves, plus the domain-box
/// faces of inside leaves, welded into one conforming mesh. Facets face out.
SurfaceMesh extract_surface(const Arrangement& arr, const OccupancyLabels& labels);

/// Replaces each edge-connected cluster of facets sharing a source plane by
/// its boundary polygon, or by constrained Delaunay triangles when the
/// cluster has holes. Clusters with pinched boundaries are left as they are.
SurfaceMesh aggregate_facets(const SurfaceMesh& mesh, const ToleranceContext& tol);

/// A subtree whose leaves all carry the same label, standing for its root.
struct MergedCell {
  int node = -1;
  Label label = Label::Unknown;
  std::vector<int> leaves;
};

/// Bottom-up sibling merge. Result is ordered by node id.
std::vector<MergedCell> merge_siblings(const Arrangement& arr,
                                       const OccupancyLabels& labels);

struct ConvexDecomposition {
  std::vector<ConvexCell> cells;
  std::vector<std::vector<int>> provenance;  // absorbed leaves per cell
  bool overlap = false;  // some merge added volume, so cells may intersect

  std::size_t facet_count() const;
  double volume() const;
  /// Number of cells whose interior (shrunk by eps) contains p.
  int containing(const Vec3& p, double eps) const;
};

/// Best-first pairwise hull merging of adjacent cells while the volume
/// defect |Va + Vb - V(conv(a, b))| stays below tau. tau = 0 merges only
/// pairs whose union is already convex (defect below 1e-9 of the total).
ConvexDecomposition simplify_cells(std::vector<ConvexCell> cells,
                                   std::vector<std::vector<int>> provenance,
                                   std::span<const std::pair<int, int>> adjacency,
                                   double tau, const ToleranceContext& tol);

/// Inside merged cells of an arrangement, adjacency taken from the leaf graph.
ConvexDecomposition simplify_cells(const Arrangement& arr,
                                   std::span<const MergedCell> cells, double tau);

enum class DecompositionFormat { Obj, Json };

/// OBJ with one group of triangles per cell, or JSON half-space lists.
void export_decomposition(const ConvexDecomposition& decomp,
                          const std::filesystem::path& path,
                          DecompositionFormat format);
std::string decomposition_to_json(const ConvexDecomposition& decomp);
std::string decomposition_to_obj(const ConvexDecomposition& decomp);

/// Outward planes per cell, as stored in the JSON export.
struct DecompositionRecord {
  std::vector<std::vector<PlaneEq>> halfspaces;
  std::vector<std::vector<int>> provenance;
  bool overlap = false;
};
DecompositionRecord decomposition_from_json(const std::string& text);

}  // namespace compod
