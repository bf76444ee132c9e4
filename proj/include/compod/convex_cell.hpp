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

#include "compod/geometry.hpp"

namespace compod {

// Source ids of the six domain-box faces. Primitive ids are >= 0.
inline constexpr int kBoxSourceBase = -1;  // -1..-6: -x, +x, -y, +y, -z, +z
inline constexpr int kNoSource = -100;
inline bool is_box_source(int source) { return source <= -1 && source >= -6; }

/// One bounding half-space. The cell lies on `side` of `plane`; `source`
/// records which primitive (or box face) produced it.
struct HalfSpace {
  PlaneEq plane;
  Side side = Side::Negative;
  int source = kNoSource;

  Vec3 outward_normal() const {
    return side == Side::Negative ? plane.n : Vec3(-plane.n);
  }
  /// Plane whose negative side is the cell.
  PlaneEq outward_plane() const {
    return side == Side::Negative ? plane : plane.flipped();
  }
};

/// Vertex loop of one facet, counter-clockwise seen from outside the cell.
struct CellFacet {
  int halfspace = -1;
  std::vector<int> loop;
};

/// Bounded convex polyhedron: half-space list plus its vertex/facet
/// realization. Facets and half-spaces correspond one to one.
class ConvexCell {
 public:
  ConvexCell() = default;

  /// Axis-aligned box, box faces carry sources -1..-6.
  static ConvexCell box(const Vec3& lo, const Vec3& hi);
  /// Takes ownership of a realization; computes the volume. Facet loops must
  /// already be oriented outward.
  static ConvexCell from_parts(std::vector<HalfSpace> halfspaces,
                               std::vector<Vec3> vertices,
                               std::vector<CellFacet> facets);

  bool empty() const { return vertices_.empty(); }
  const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<CellFacet>& facets() const { return facets_; }
  double volume() const { return volume_; }
  Vec3 vertex_centroid() const;
  std::vector<Vec3> facet_polygon(std::size_t facet) const;

  /// Closed containment test with tolerance eps.
  bool contains(const Vec3& p, double eps) const;
  /// True if some vertex lies strictly (beyond eps) on each side.
  bool crossed_by(const PlaneEq& plane, double eps) const;
  /// True if any facet lies on a domain-box face.
  bool touches_box() const;

 private:
  std::vector<HalfSpace> halfspaces_;
  std::vector<Vec3> vertices_;
  std::vector<CellFacet> facets_;
  double volume_ = 0.0;
};

/// Signed tetrahedral decomposition from the vertex centroid.
/// Throws DegenerateCell below 4 vertices.
double cell_volume(const ConvexCell& cell);

enum class SplitStatus { Ok, NoIntersection, DegenerateCut };

struct SplitResult {
  SplitStatus status = SplitStatus::NoIntersection;
  ConvexCell negative;
  ConvexCell positive;
  /// Cut polygon, counter-clockwise seen from the positive side of the plane.
  std::vector<Vec3> interface;
};

/// Splits a cell by a plane. Vertices within eps_abs of the plane are shared
/// by both children. `source` is recorded on the new half-spaces.
SplitResult split_cell(const ConvexCell& cell, const PlaneEq& plane,
                       const ToleranceContext& tol, int source = kNoSource);

/// Orders indices of coplanar points counter-clockwise around `normal`.
void order_loop_ccw(std::vector<int>& loop, std::span<const Vec3> vertices,
                    const Vec3& normal);

}  // namespace compod
