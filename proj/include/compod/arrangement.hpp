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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compod/convex_cell.hpp"
#include "compod/primitives.hpp"

namespace compod {

enum class Ordering { Dynamic, ProductOnly, AreaDesc };
enum class Basis { InlierPoints, HullVertices, HullSampled };

struct ArrangementConfig {
  Ordering ordering = Ordering::Dynamic;
  Basis basis = Basis::InlierPoints;
  std::size_t hull_samples = 1'000'000;  // total, for Basis::HullSampled
  std::uint64_t seed = 0;                // hull sampling
  double padding_frac = 0.02;
  double eps_rel = 1e-9;
};

enum class Label : std::int8_t { Unknown = -1, Outside = 0, Inside = 1 };

/// A primitive living in one leaf: either a subset of driving points or, in
/// polygon modes, the part of its 2D hull inside the leaf.
struct Assignment {
  int primitive = -1;
  std::vector<int> points;     // indices into Arrangement::points
  std::vector<Vec3> polygon;   // clipped hull, polygon modes only
};

struct BspNode {
  ConvexCell cell;
  int parent = -1;
  std::array<int, 2> children{-1, -1};  // negative side, positive side
  PlaneEq split_plane;
  int split_source = kNoSource;
  int depth = 0;
  std::vector<Assignment> assigned;  // leaves under construction only
  Label label = Label::Unknown;

  bool is_leaf() const { return children[0] < 0; }
};

/// Shared facet of two leaves. The polygon is counter-clockwise seen from
/// cell b, i.e. its normal points from a into b.
struct GraphEdge {
  int a = -1, b = -1;
  std::vector<Vec3> polygon;
  int source = kNoSource;
  double area = 0.0;
  bool alive = true;

  int other(int node) const { return node == a ? b : a; }
};

class CellAdjacencyGraph {
 public:
  int add_edge(int a, int b, std::vector<Vec3> polygon, int source, double area);
  void remove_edge(int e);
  /// Live edges incident to a node.
  std::vector<int> incident(int node) const;
  const GraphEdge& edge(int e) const { return edges_[e]; }
  GraphEdge& edge(int e) { return edges_[e]; }
  std::size_t edge_slots() const { return edges_.size(); }
  std::size_t edge_count() const { return live_; }
  /// Ids of live edges in creation order.
  std::vector<int> live_edges() const;

 private:
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<int>> by_node_;
  std::size_t live_ = 0;
};

struct ArrangementStats {
  std::size_t cells = 0;
  std::size_t splits = 0;
  std::size_t priority_splits = 0;
  std::size_t failed_splits = 0;
  std::size_t reassignments = 0;  // driving points handed to children
  int max_depth = 0;
  double wall_s = 0.0;
  std::size_t peak_bytes = 0;
};

struct Arrangement {
  ToleranceContext tol;
  std::vector<BspNode> nodes;
  int root = 0;
  CellAdjacencyGraph graph;
  std::vector<PlaneEq> planes;  // by primitive id
  std::vector<Vec3> points;     // driving points
  std::vector<double> hull_area;  // by primitive id, for area ordering
  std::vector<int> split_order;  // node ids in the order they were split
  ArrangementStats stats;

  std::vector<int> leaves() const;
  bool is_leaf(int node) const { return nodes[node].is_leaf(); }
};

struct SplitChoice {
  int primitive = -1;
  bool priority = false;
};

/// Root node on `domain`, no assignments.
Arrangement make_arrangement(const ConvexCell& domain, const ToleranceContext& tol);

/// Picks the splitting primitive of a leaf. Empty iff nothing is assigned.
std::optional<SplitChoice> select_split(const Arrangement& arr, int leaf,
                                        Ordering ordering = Ordering::Dynamic);

/// Splits a leaf cell by a plane, creates the two children and updates the
/// adjacency graph. Assignments are left alone. Returns the split status;
/// the tree is untouched unless it is Ok.
SplitStatus split_leaf(Arrangement& arr, int leaf, const PlaneEq& plane, int source);

/// split_leaf with the primitive's plane, then distributes the other
/// assignments to the children and retires the primitive.
SplitStatus apply_split(Arrangement& arr, int leaf, int primitive);

Arrangement build_arrangement(std::span<const PlanarPrimitive> primitives,
                              const PointCloud& cloud,
                              const ArrangementConfig& cfg = {});

/// Every plane splits every cell it crosses, in input order.
Arrangement exhaustive_arrangement(std::span<const PlaneEq> planes,
                                   const ConvexCell& domain,
                                   const ToleranceContext& tol);

struct ArrangementReport {
  std::size_t cells = 0;
  std::size_t splits = 0;
  int max_depth = 0;
  std::size_t edges = 0;
  double wall_s = 0.0;
  double peak_mem_mb = 0.0;
};

ArrangementReport arrangement_stats(const Arrangement& arr);

/// JSON dump with enough information to rebuild the tree exactly.
std::string arrangement_to_json(const Arrangement& arr);
/// Replays the recorded splits from the root box. Throws ParseError.
Arrangement arrangement_from_json(const std::string& text);

/// Leaf containing p (descends the tree by split planes).
int locate_leaf(const Arrangement& arr, const Vec3& p);

}  // namespace compod
