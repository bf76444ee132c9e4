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

#include <cmath>
#include <limits>

#include "compod/bvh.hpp"
#include "compod/error.hpp"
#include "compod/metrics.hpp"
#include "compod/synthetic.hpp"

using namespace compod;

namespace {

SurfaceMesh cube(const Vec3& lo, double size) {
  return cell_surface(ConvexCell::box(lo, lo + Vec3::Constant(size)));
}

SurfaceMesh square(double z, const Vec3& normal = Vec3::UnitZ()) {
  SurfaceMesh m;
  if (normal.z() != 0.0) {
    m.vertices = {Vec3(0, 0, z), Vec3(1, 0, z), Vec3(1, 1, z), Vec3(0, 1, z)};
  } else {
    m.vertices = {Vec3(z, 0, 0), Vec3(z, 1, 0), Vec3(z, 1, 1), Vec3(z, 0, 1)};
  }
  m.facets.push_back({{0, 1, 2, 3}, 0});
  return m;
}

// O(n^2) nearest-sample distances.
std::vector<double> brute(const SampleSet& from, const SampleSet& to) {
  std::vector<double> d;
  for (const Vec3& p : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to.points) best = std::min(best, (p - q).squaredNorm());
    d.push_back(std::sqrt(best));
  }
  return d;
}

}  // namespace

TEST_CASE("identical meshes") {
  const SurfaceMesh m = random_box_scene(2).ground_truth;
  const SurfaceDistances d = compare_surfaces(m, m, 5000, 9);
  CHECK(d.cd == 0.0);
  CHECK(d.hd == 0.0);
  CHECK(d.nc == 1.0);
  CHECK(normal_consistency(square(0.0), flipped(square(0.0)), 5000, 9) == 1.0);
}

TEST_CASE("parallel squares at distance t") {
  const double t = 0.05;
  const SurfaceMesh a = square(0.0), b = square(t);
  CHECK(chamfer(a, b, 4000, 1) == doctest::Approx(t).epsilon(1e-12));
  CHECK(hausdorff(a, b, 4000, 1) == doctest::Approx(t).epsilon(1e-12));
  MetricOptions exact;
  exact.exact = true;
  CHECK(chamfer(a, b, 4000, 1, exact) == doctest::Approx(t).epsilon(1e-12));
}

TEST_CASE("orthogonal planes have zero normal consistency") {
  CHECK(normal_consistency(square(0.0), square(2.0, Vec3::UnitX()), 1000, 3) == 0.0);
}

TEST_CASE("CD and HD equal the brute-force oracle") {
  const SurfaceMesh a = random_box_scene(1).ground_truth;
  const SurfaceMesh b = random_box_scene(4).ground_truth;
  const std::size_t n = 1000;
  const SampleSet sa = sample_surface(a, n, 17), sb = sample_surface(b, n, 17);
  const auto ab = brute(sa, sb), ba = brute(sb, sa);
  double mab = 0, mba = 0, hd = 0;
  for (double x : ab) {
    mab += x;
    hd = std::max(hd, x);
  }
  for (double x : ba) {
    mba += x;
    hd = std::max(hd, x);
  }
  const double cd = 0.5 * mab / n + 0.5 * mba / n;
  const SurfaceDistances d = compare_surfaces(a, b, n, 17);
  CHECK(std::abs(d.cd - cd) <= 1e-12);
  CHECK(std::abs(d.hd - hd) <= 1e-12);
  CHECK(d.cd <= d.hd);
  // Symmetric under swapping the meshes.
  CHECK(chamfer(b, a, n, 17) == d.cd);
  CHECK(hausdorff(b, a, n, 17) == d.hd);
}

TEST_CASE("metrics do not depend on the thread count") {
  const SurfaceMesh a = random_box_scene(3).ground_truth;
  const SurfaceMesh b = random_box_scene(5).ground_truth;
  MetricOptions one, four;
  four.threads = 4;
  const SurfaceDistances x = compare_surfaces(a, b, 20000, 2, one);
  const SurfaceDistances y = compare_surfaces(a, b, 20000, 2, four);
  CHECK(x.cd == y.cd);
  CHECK(x.hd == y.hd);
  CHECK(x.nc == y.nc);
  CHECK(volumetric_iou(a, b, 50000, 4, 1) == volumetric_iou(a, b, 50000, 4, 4));
}

TEST_CASE("grown cube Hausdorff approaches the corner distance") {
  const double s = 0.1;
  const double hd = hausdorff(cube(Vec3::Zero(), 1.0), cube(Vec3::Constant(-s), 1.0 + 2 * s),
                              100000, 5);
  CHECK(std::abs(hd - s * std::sqrt(3.0)) <= 0.1 * s * std::sqrt(3.0));
}

TEST_CASE("volumetric IoU") {
  const SurfaceMesh a = cube(Vec3::Zero(), 1.0);
  CHECK(std::abs(volumetric_iou(a, a, 1000000, 1) - 1.0) <= 0.01);
  CHECK(volumetric_iou(a, cube(Vec3(3, 0, 0), 1.0), 100000, 1) == 0.0);
  const SurfaceMesh shifted = cell_surface(ConvexCell::box(Vec3(0.5, 0, 0), Vec3(1.5, 1, 1)));
  CHECK(std::abs(volumetric_iou(a, shifted, 1000000, 2) - 1.0 / 3.0) <= 0.01);

  ConvexDecomposition d;
  d.cells.push_back(ConvexCell::box(Vec3(0, 0, 0), Vec3(0.5, 1, 1)));
  d.cells.push_back(ConvexCell::box(Vec3(0.5, 0, 0), Vec3(1, 1, 1)));
  CHECK(std::abs(volumetric_iou(d, a, 200000, 3) - 1.0) <= 0.01);
  CHECK(std::abs(volumetric_iou(d, shifted, 200000, 3) - 1.0 / 3.0) <= 0.01);

  SurfaceMesh open = a;
  open.facets.pop_back();
  CHECK_THROWS_AS(volumetric_iou(a, open, 1000, 1), OpenMesh);
}

TEST_CASE("inside tester handles rays through edges and vertices") {
  const InsideTester t(cube(Vec3::Zero(), 1.0));
  CHECK(t.inside(Vec3(0.5, 0.5, 0.5)));
  CHECK(t.inside(Vec3(0.25, 0.5, 0.5)));  // axis ray would graze a diagonal
  CHECK_FALSE(t.inside(Vec3(-0.5, 0.0, 0.0)));
  CHECK_FALSE(t.inside(Vec3(1.5, 0.5, 0.5)));
  CHECK(point_triangle_distance(Vec3(0, 0, 2), Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(0, 1, 0)) ==
        2.0);
  CHECK(point_triangle_distance(Vec3(3, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)) ==
        2.0);
}

TEST_CASE("empty meshes are rejected") {
  CHECK_THROWS_AS(chamfer(SurfaceMesh{}, square(0.0), 10, 1), EmptyMesh);
  CHECK_THROWS_AS(sample_surface(SurfaceMesh{}, 10, 1), EmptyMesh);
}

TEST_CASE("reports") {
  SurfaceMesh s = cube(Vec3::Zero(), 1.0);
  ConvexDecomposition d;
  d.cells.push_back(ConvexCell::box(Vec3::Zero(), Vec3::Ones()));
  Report r = complexity_report(&s, &d, 7, 0.25, 12.5);
  CHECK(r.cells == 7);
  CHECK(r.surface_facets == 6);
  CHECK(r.volume_cells == 1);
  CHECK(r.volume_facets == 6);
  r.cd = 0.1 + 0.2;
  r.hd = 1.0 / 3.0;
  r.seed = 42;
  r.config_hash = "00ff";
  const std::string j = report_to_json(r);
  const Report back = report_from_json(j);
  CHECK(back.cd == r.cd);
  CHECK(back.hd == r.hd);
  CHECK(std::isnan(back.nc));
  CHECK(back.time_s == r.time_s);
  CHECK(back.peak_mem_mb == r.peak_mem_mb);
  CHECK(back.seed == 42);
  CHECK(report_to_json(back) == j);
  CHECK(report_table(r).find("surface_facets") != std::string::npos);

  const Report empty = complexity_report(nullptr, nullptr, 1, 0.0, 0.0);
  CHECK(empty.surface_facets == 0);
  CHECK_THROWS_AS(report_from_json("{}"), ParseError);
}
