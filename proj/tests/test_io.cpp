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

#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "compod/error.hpp"
#include "compod/io.hpp"

using namespace compod;
namespace fs = std::filesystem;

namespace {

std::string tmp(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "compod_io_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("point cloud round trip is bit exact") {
  PointCloud c;
  c.points = {Vec3(0.1, 0.2, 0.3), Vec3(1.0 / 3.0, -2e-300, 7e12),
              Vec3(-0.0, 5.5, std::nextafter(1.0, 2.0))};
  c.normals = {Vec3::UnitX(), Vec3::UnitY(), Vec3(0.6, 0.0, 0.8)};
  for (bool ascii : {false, true}) {
    const std::string path = tmp(ascii ? "c_ascii.ply" : "c_bin.ply");
    save_point_cloud(c, path, ascii);
    const PointCloud r = load_point_cloud(path);
    REQUIRE(r.points.size() == 3);
    REQUIRE(r.normals.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(r.points[i] == c.points[i]);
      CHECK(r.normals[i] == c.normals[i]);
    }
  }
}

TEST_CASE("PLY variants and errors") {
  const std::string f32 = tmp("f32.ply");
  {
    std::string s =
        "ply\nformat binary_big_endian 1.0\ncomment x\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\nproperty uchar red\n"
        "end_header\n";
    const float v[3] = {1.5f, -2.0f, 0.25f};
    for (float f : v) {
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      for (int k = 3; k >= 0; --k) s.push_back(static_cast<char>(b[k]));
    }
    s.push_back(static_cast<char>(200));
    write_file(f32, s);
  }
  const PointCloud c = load_point_cloud(f32);
  REQUIRE(c.points.size() == 1);
  CHECK(c.points[0] == Vec3(1.5, -2.0, 0.25));
  CHECK_FALSE(c.has_normals());

  const std::string novert = tmp("novert.ply");
  write_file(novert, "ply\nformat ascii 1.0\nelement face 0\n"
                     "property list uchar int vertex_indices\nend_header\n");
  CHECK_THROWS_AS(load_point_cloud(novert), ParseError);

  const std::string trunc = tmp("trunc.ply");
  write_file(trunc, "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
                    "property double x\nproperty double y\nproperty double z\n"
                    "end_header\n0123456789");
  CHECK_THROWS_AS(load_point_cloud(trunc), ParseError);
  CHECK_THROWS_AS(load_point_cloud(tmp("cloud.xyz")), UnsupportedFormat);
  CHECK_THROWS_AS(load_point_cloud(tmp("missing.ply")), IoError);
}

TEST_CASE("mesh round trip through OBJ and PLY") {
  SurfaceMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0.1), Vec3(0, 1, 1.0 / 3.0)};
  m.facets = {{{0, 1, 2, 3}, 0}, {{0, 2, 1}, 1}};
  for (const char* name : {"m.obj", "m.ply"}) {
    const std::string path = tmp(name);
    save_mesh(m, path);
    const SurfaceMesh r = load_mesh(path);
    REQUIRE(r.vertices.size() == 4);
    REQUIRE(r.facets.size() == 2);
    for (int i = 0; i < 4; ++i) CHECK(r.vertices[i] == m.vertices[i]);
    CHECK(r.facets[0].loop == m.facets[0].loop);
    CHECK(r.facets[1].loop == m.facets[1].loop);
  }
  const std::string bad = tmp("bad.obj");
  write_file(bad, "v 0 0 0\nv 1 0 0\nf 1 2 7\n");
  try {
    load_mesh(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(save_mesh(m, tmp("m.stl")), UnsupportedFormat);
}

TEST_CASE("primitive files") {
  std::vector<PlanarPrimitive> prims(2);
  prims[0].plane = {Vec3::UnitZ(), -0.5};
  prims[0].inliers = {0, 1, 2};
  prims[0].orientation = 1;
  prims[1].id = 1;
  prims[1].plane = {Vec3(0.6, 0.8, 0.0), 0.25};
  prims[1].inliers = {3, 4};
  prims[1].orientation = -1;
  const std::string path = tmp("prims.json");
  save_primitives(prims, path);
  const auto r = load_primitives(path, 5);
  REQUIRE(r.size() == 2);
  CHECK(r[1].inliers == prims[1].inliers);
  CHECK(r[1].orientation == -1);
  CHECK(r[1].plane.n.isApprox(prims[1].plane.n, 1e-15));
  try {
    load_primitives(path, 4);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("index 4") != std::string::npos);
  }

  const std::string unnorm = tmp("unnorm.json");
  write_file(unnorm, R"({"planes":[[0,0,2,-1]],"inliers":[[0]]})");
  const auto u = load_primitives(unnorm);
  CHECK(u[0].plane.n == Vec3::UnitZ());
  CHECK(u[0].plane.d == -0.5);
  CHECK(u[0].orientation == 0);

  const std::string broken = tmp("broken.json");
  write_file(broken, R"({"planes":[[0,0,1,0]],)");
  CHECK_THROWS_AS(load_primitives(broken), ParseError);
}
