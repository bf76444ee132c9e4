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

#include "compod/geometry.hpp"

namespace compod {

using Triangle = std::array<int, 3>;

/// Constrained Delaunay triangulation of a polygon with holes. Vertices are
/// numbered by concatenating the outer loop and then each hole in order;
/// loops may have either orientation. Returned triangles are
/// counter-clockwise. Every loop edge is an edge of the triangulation.
///
/// Throws InvalidLoops when a loop self-intersects, loops cross, or a hole
/// is not strictly inside the outer loop.
std::vector<Triangle> constrained_delaunay_2d(
    std::span<const Vec2> outer, std::span<const std::vector<Vec2>> holes);

}  // namespace compod
