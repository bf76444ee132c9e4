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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "compod/mesh.hpp"
#include "compod/primitives.hpp"

namespace compod {

/// PLY point cloud (ascii or binary, float or double, optional normals).
PointCloud load_point_cloud(const std::string& path);
/// Binary little-endian PLY with double coordinates, so a reload is exact.
void save_point_cloud(const PointCloud& cloud, const std::string& path,
                      bool ascii = false);

/// OBJ or PLY, chosen by extension. Polygon faces are kept as is.
SurfaceMesh load_mesh(const std::string& path);
void save_mesh(const SurfaceMesh& mesh, const std::string& path);

/// {"planes": [[a,b,c,d],...], "inliers": [[i,...],...], "orientations": [...]}.
/// Plane coefficients are normalized on load. With `cloud_size`, any inlier
/// index outside the cloud raises ParseError naming the index.
std::vector<PlanarPrimitive> load_primitives(
    const std::string& path, std::optional<std::size_t> cloud_size = std::nullopt);
void save_primitives(const std::vector<PlanarPrimitive>& primitives,
                     const std::string& path);

/// Whole file as a string; IoError if unreadable.
std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes (truncate then write).
void write_file(const std::string& path, const std::string& contents);

}  // namespace compod
