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
#include <span>
#include <string>
#include <vector>

#include "compod/arrangement.hpp"
#include "compod/mesh.hpp"

namespace compod {

struct LabelConfig {
  double lambda = 0.5;
  double vote_radius_frac = 0.01;  // of the bounding-box diagonal
  int proxy_samples_per_cell = 32;
  std::uint64_t seed = 0;
  int threads = 1;
  void validate() const;
};

struct OccupancyLabels {
  std::vector<Label> by_node;   // Unknown for internal nodes
  std::vector<double> margin;   // proxy path: (in - out) / samples per node
  double energy = 0.0;          // graph-cut path only
  bool empty_votes = false;

  Label at(int node) const { return by_node[node]; }
  std::size_t count(Label l) const;
};

/// (cost of outside, cost of inside) per node.
using UnaryCost = std::array<double, 2>;

struct PairwiseTerm {
  int a = -1, b = -1;
  double weight = 0.0;
};

struct CutResult {
  std::vector<int> labels;  // 1 inside, 0 outside
  double energy = 0.0;
};

/// Energy of a labelling, summed in index order.
double labelling_energy(std::span<const UnaryCost> unary,
                        std::span<const PairwiseTerm> pairwise,
                        std::span<const int> labels);

/// Globally optimal binary labelling by max-flow. Ties resolve to outside.
/// Throws NegativePairwise.
CutResult min_cut(std::span<const UnaryCost> unary,
                  std::span<const PairwiseTerm> pairwise);

OccupancyLabels label_cells_normal(const Arrangement& arr,
                                   std::span<const PlanarPrimitive> primitives,
                                   const PointCloud& cloud,
                                   const LabelConfig& cfg = {});

/// Throws OpenProxyMesh unless every edge has exactly two incident facets.
OccupancyLabels label_cells_proxy(const Arrangement& arr, const SurfaceMesh& proxy,
                                  const LabelConfig& cfg = {});

/// Copies labels into the tree leaves.
void apply_labels(Arrangement& arr, const OccupancyLabels& labels);
OccupancyLabels labels_of(const Arrangement& arr);

/// JSON object {leaf id: "in" | "out"}.
std::string labels_to_json(const Arrangement& arr, const OccupancyLabels& labels);
OccupancyLabels labels_from_json(const Arrangement& arr, const std::string& text);

}  // namespace compod
