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
#include <span>
#include <vector>

#include "compod/convex_cell.hpp"
#include "compod/geometry.hpp"

namespace compod {

/// Planar polygon facet of a surface mesh. Counter-clockwise seen from the
/// side the facet normal points to.
struct MeshFacet {
  std::vector<int> loop;
  int source = kNoSource;  // supporting primitive id, box face, or none
};

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<MeshFacet> facets;

  bool empty() const { return facets.empty(); }
  std::vector<Vec3> polygon(std::size_t facet) const;
  /// Newell normal (unit) of a facet.
  Vec3 facet_normal(std::size_t facet) const;
  double area() const;
  /// Vertices referenced by at least one facet.
  std::size_t used_vertex_count() const;
};

struct MeshAudit {
  std::size_t vertices = 0;  // referenced vertices
  std::size_t edges = 0;
  std::size_t facets = 0;
  std::size_t boundary_edges = 0;      // incidence 1
  std::size_t nonmanifold_edges = 0;   // incidence > 2
  std::size_t incoherent_edges = 0;    // incidence 2, same direction twice
  long euler_characteristic = 0;

  bool watertight() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
  bool oriented() const { return incoherent_edges == 0; }
};

MeshAudit audit_mesh(const SurfaceMesh& mesh);

/// Builds an indexed mesh from loose polygons: vertices closer than
/// `weld_eps` are merged and vertices lying inside another polygon's edge are
/// inserted into it, so that shared boundaries become shared edges.
SurfaceMesh build_conforming_mesh(
    std::span<const std::pair<std::vector<Vec3>, int>> polygons,
    double weld_eps);

/// Triangulates every facet (fan for convex, constrained Delaunay
/// otherwise). Triangles keep the facet orientation.
std::vector<std::array<int, 3>> triangulate(const SurfaceMesh& mesh,
                                            std::vector<int>* source_facet = nullptr);

/// Gives each local sheet through a pinched edge or vertex its own copy of
/// the vertices there, so that every edge borders at most two facets. Facets
/// meeting at a pinched edge are paired around it by angle, each pair bounding
/// one solid wedge. Geometry is unchanged.
SurfaceMesh split_nonmanifold(const SurfaceMesh& mesh);

/// Flips the orientation of every facet.
SurfaceMesh flipped(const SurfaceMesh& mesh);

/// Surface of a convex cell as a mesh (one facet per cell facet).
SurfaceMesh cell_surface(const ConvexCell& cell);

}  // namespace compod
