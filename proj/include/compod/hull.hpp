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

#include "compod/convex_cell.hpp"

namespace compod {

/// Incremental 3D convex hull. Coplanar hull triangles are merged into
/// polygonal facets. Throws DegenerateInput for fewer than 4 affinely
/// independent points (within eps_abs).
ConvexCell convex_hull_3d(std::span<const Vec3> points,
                          const ToleranceContext& tol);

}  // namespace compod
