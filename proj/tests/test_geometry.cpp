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
#include <random>

#include "compod/cdt.hpp"
#include "compod/convex_cell.hpp"
#include "compod/error.hpp"
#include "compod/hull.hpp"

using namespace compod;

namespace {

const ToleranceContext kUnitTol(std::sqrt(3.0));

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return std::abs((b - a).dot((c - a).cross(d - a))) / 6.0;
}

// Barycentric inside test, independent of the cell machinery.
bool in_tet(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
            const Vec3& d) {
  const double v = tet_volume(a, b, c, d);
  const double s = tet_volume(p, b, c, d) + tet_volume(a, p, c, d) +
                   tet_volume(a, b, p, d) + tet_volume(a, b, c, p);
  return s <= v * (1 + 1e-12);
}

// Brute-force hull facets over all point triples.
std::vector<PlaneEq> brute_hull_planes(const std::vector<Vec3>& pts) {
  std::vector<PlaneEq> planes;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const Vec3 nrm = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        if (nrm.norm() < 1e-12) continue;
        PlaneEq pl = PlaneEq::from_point_normal(pts[i], nrm);
        int neg = 0, pos = 0;
        for (const Vec3& p : pts) {
          const double s = signed_distance(pl, p);
          neg += s < -1e-12;
          pos += s > 1e-12;
        }
        if (neg == 0) planes.push_back(pl.flipped());
        if (pos == 0) planes.push_back(pl);
      }
  return planes;
}

}  // namespace

TEST_SUITE("geom-core") {

TEST_CASE("signed_distance examples") {
  const PlaneEq z0{Vec3::UnitZ(), 0.0};
  CHECK(signed_distance(z0, Vec3(0, 0, 1)) == 1.0);
  CHECK(signed_distance(z0, Vec3(5, 7, 0)) == 0.0);
  const PlaneEq diag = PlaneEq::from_coefficients(1, 1, 1, -1);
  CHECK(signed_distance(diag, Vec3(1, 1, 1)) ==
        doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(diag.n.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classify_points partitions indices") {
  const PlaneEq z0{Vec3::UnitZ(), 0.0};
  std::vector<Vec3> pts{{0, 0, -1}, {0, 0, 1}, {0, 0, 0}};
  auto c = classify_points(z0, pts, kUnitTol);
  CHECK(c.left == std::vector<int>{0});
  CHECK(c.right == std::vector<int>{1});
  CHECK(c.on == std::vector<int>{2});

  auto e = classify_points(z0, std::vector<Vec3>{}, kUnitTol);
  CHECK(e.left.empty());
  CHECK(e.right.empty());
  CHECK(e.on.empty());

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vec3> many;
  for (int i = 0; i < 1000; ++i) many.emplace_back(u(rng), u(rng), u(rng));
  const PlaneEq x05{Vec3::UnitX(), -0.5};
  auto r = classify_points(x05, many, kUnitTol);
  std::size_t l = 0, g = 0, o = 0;
  for (const Vec3& p : many) {
    const double s = p.x() - 0.5;
    if (s < -kUnitTol.eps_abs()) ++l;
    else if (s > kUnitTol.eps_abs()) ++g;
    else ++o;
  }
  CHECK(r.left.size() == l);
  CHECK(r.right.size() == g);
  CHECK(r.on.size() == o);
  CHECK(r.left.size() + r.right.size() + r.on.size() == many.size());
}

TEST_CASE("split unit cube") {
  const ConvexCell cube = ConvexCell::box(Vec3::Zero(), Vec3::Ones());
  CHECK(cube.volume() == doctest::Approx(1.0));
  const auto s = split_cell(cube, {Vec3::UnitX(), -0.5}, kUnitTol, 3);
  REQUIRE(s.status == SplitStatus::Ok);
  CHECK(s.negative.volume() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.positive.volume() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(polygon_area(s.interface) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.negative.facets().size() == 6);
  CHECK(s.positive.facets().size() == 6);
  for (const Vec3& p : s.interface) CHECK(p.x() == doctest::Approx(0.5));
  // Interface is counter-clockwise around +x.
  CHECK(polygon_area_vector(s.interface).x() > 0);

  const auto miss = split_cell(cube, {Vec3::UnitX(), -2.0}, kUnitTol);
  CHECK(miss.status == SplitStatus::NoIntersection);
  // A plane touching a face is no intersection either.
  CHECK(split_cell(cube, {Vec3::UnitX(), -1.0}, kUnitTol).status ==
        SplitStatus::NoIntersection);
}

TEST_CASE("split random tetrahedron conserves volume") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> t;
    for (int i = 0; i < 4; ++i) t.emplace_back(u(rng), u(rng), u(rng));
    if (tet_volume(t[0], t[1], t[2], t[3]) < 1e-3) continue;
    const ConvexCell tet = convex_hull_3d(t, kUnitTol);
    const Vec3 c = (t[0] + t[1] + t[2] + t[3]) / 4;
    Vec3 dir(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
    const PlaneEq plane = PlaneEq::from_point_normal(c, dir);
    const auto s = split_cell(tet, plane, kUnitTol);
    REQUIRE(s.status == SplitStatus::Ok);
    const double parent = tet.volume();
    CHECK(std::abs(s.negative.volume() + s.positive.volume() - parent) <=
          1e-9 * parent);
    CHECK(parent == doctest::Approx(tet_volume(t[0], t[1], t[2], t[3])));
    for (const auto* child : {&s.negative, &s.positive}) {
      for (std::size_t f = 0; f < child->facets().size(); ++f) {
        const auto& h = child->halfspaces()[child->facets()[f].halfspace];
        for (const Vec3& v : child->facet_polygon(f)) {
          CHECK(std::abs(signed_distance(h.plane, v)) <= kUnitTol.eps_abs());
        }
      }
    }
    if (trial < 3) {
      // Monte-Carlo oracle on the negative part.
      const Vec3 lo = t[0].cwiseMin(t[1]).cwiseMin(t[2]).cwiseMin(t[3]);
      const Vec3 hi = t[0].cwiseMax(t[1]).cwiseMax(t[2]).cwiseMax(t[3]);
      const double box = (hi - lo).prod();
      std::size_t hits = 0;
      const std::size_t samples = 1000000;
      for (std::size_t i = 0; i < samples; ++i) {
        const Vec3 p(lo.x() + u(rng) * (hi.x() - lo.x()),
                     lo.y() + u(rng) * (hi.y() - lo.y()),
                     lo.z() + u(rng) * (hi.z() - lo.z()));
        if (in_tet(p, t[0], t[1], t[2], t[3]) && signed_distance(plane, p) < 0) {
          ++hits;
        }
      }
      const double mc = box * static_cast<double>(hits) / samples;
      CHECK(s.negative.volume() == doctest::Approx(mc).epsilon(0.01));
    }
  }
}

TEST_CASE("cell_volume") {
  CHECK(cell_volume(ConvexCell::box(Vec3::Zero(), Vec3::Ones())) ==
        doctest::Approx(1.0));
  std::vector<Vec3> simplex{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(cell_volume(convex_hull_3d(simplex, kUnitTol)) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(cell_volume(ConvexCell{}), DegenerateCell);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  const ConvexCell hull = convex_hull_3d(pts, kUnitTol);
  const auto planes = brute_hull_planes(pts);
  std::size_t hits = 0;
  const std::size_t samples = 1000000;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    bool inside = true;
    for (const auto& pl : planes) {
      if (signed_distance(pl, p) > 0) {
        inside = false;
        break;
      }
    }
    hits += inside;
  }
  CHECK(cell_volume(hull) ==
        doctest::Approx(static_cast<double>(hits) / samples).epsilon(0.01));
  for (const Vec3& p : pts) CHECK(hull.contains(p, kUnitTol.eps_abs()));
}

TEST_CASE("convex_hull_2d") {
  std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto h = convex_hull_2d(sq, 1e-9);
  CHECK(h.size() == 4);
  CHECK(signed_area_2d(h) == doctest::Approx(1.0));

  std::vector<Vec2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(convex_hull_2d(line, 1e-9), DegenerateInput);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec2> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(u(rng), u(rng));
  const auto hull = convex_hull_2d(pts, 1e-9);
  const double area = signed_area_2d(hull);
  CHECK(area > 0);
  for (const Vec2& p : pts) {
    for (std::size_t i = 0; i < hull.size(); ++i) {
      CHECK(orient2d(hull[i], hull[(i + 1) % hull.size()], p) >= -1e-12);
    }
  }
  double max_tri = 0;
  for (int i = 0; i < 200; i += 7)
    for (int j = i + 1; j < 200; j += 5)
      for (int k = j + 1; k < 200; k += 3)
        max_tri = std::max(max_tri, std::abs(orient2d(pts[i], pts[j], pts[k])) / 2);
  CHECK(area >= max_tri);
}

TEST_CASE("convex_hull_3d") {
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const ConvexCell cube = convex_hull_3d(corners, kUnitTol);
  CHECK(cube.facets().size() == 6);
  CHECK(cube.volume() == doctest::Approx(1.0));
  for (const auto& f : cube.facets()) CHECK(f.loop.size() == 4);

  std::vector<Vec3> flat{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.3, 0.2, 0}};
  CHECK_THROWS_AS(convex_hull_3d(flat, kUnitTol), DegenerateInput);

  // Union of two adjacent half-cubes.
  const ConvexCell box = ConvexCell::box(Vec3::Zero(), Vec3::Ones());
  const auto s = split_cell(box, {Vec3::UnitX(), -0.5}, kUnitTol);
  std::vector<Vec3> both = s.negative.vertices();
  both.insert(both.end(), s.positive.vertices().begin(), s.positive.vertices().end());
  const ConvexCell merged = convex_hull_3d(both, kUnitTol);
  CHECK(merged.volume() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(merged.facets().size() == 6);
}

TEST_CASE("constrained_delaunay_2d") {
  std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto area_of = [](const std::vector<Vec2>& pts, const std::vector<Triangle>& tris) {
    double a = 0;
    for (const auto& t : tris) a += orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) / 2;
    return a;
  };
  {
    const auto tris = constrained_delaunay_2d(square, {});
    CHECK(tris.size() == 2);
    CHECK(area_of(square, tris) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    std::vector<std::vector<Vec2>> holes{
        {{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.75}, {0.75, 0.25}}};
    const auto tris = constrained_delaunay_2d(square, holes);
    std::vector<Vec2> all = square;
    all.insert(all.end(), holes[0].begin(), holes[0].end());
    CHECK(area_of(all, tris) == doctest::Approx(0.75).epsilon(1e-9));
    for (const auto& t : tris) {
      CHECK(orient2d(all[t[0]], all[t[1]], all[t[2]]) > 0);
      const Vec2 c = (all[t[0]] + all[t[1]] + all[t[2]]) / 3;
      CHECK_FALSE(point_in_polygon_2d(c, holes[0]));
    }
    // All 8 boundary segments are triangle edges.
    auto has_edge = [&](int a, int b) {
      for (const auto& t : tris)
        for (int k = 0; k < 3; ++k)
          if ((t[k] == a && t[(k + 1) % 3] == b) || (t[k] == b && t[(k + 1) % 3] == a))
            return true;
      return false;
    };
    for (int i = 0; i < 4; ++i) {
      CHECK(has_edge(i, (i + 1) % 4));
      CHECK(has_edge(4 + i, 4 + (i + 1) % 4));
    }
  }
  {
    std::vector<std::vector<Vec2>> outside{{{2, 2}, {3, 2}, {3, 3}}};
    CHECK_THROWS_AS(constrained_delaunay_2d(square, outside), InvalidLoops);
    std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_THROWS_AS(constrained_delaunay_2d(bowtie, {}), InvalidLoops);
  }
}

TEST_CASE("CDT coverage on random star polygons with holes") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 8 + trial;
    std::vector<Vec2> outer;
    for (int i = 0; i < n; ++i) {
      const double a = 2 * M_PI * i / n;
      const double r = 2.0 + u(rng);
      outer.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    std::vector<std::vector<Vec2>> holes;
    const int hn = 3 + trial % 5;
    std::vector<Vec2> hole;
    for (int i = 0; i < hn; ++i) {
      const double a = 2 * M_PI * i / hn;
      const double r = 0.5 + 0.4 * u(rng);
      hole.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    holes.push_back(hole);
    const auto tris = constrained_delaunay_2d(outer, holes);
    std::vector<Vec2> all = outer;
    all.insert(all.end(), hole.begin(), hole.end());
    double area = 0;
    for (const auto& t : tris) area += orient2d(all[t[0]], all[t[1]], all[t[2]]) / 2;
    const double expected = std::abs(signed_area_2d(outer)) - std::abs(signed_area_2d(hole));
    CHECK(std::abs(area - expected) <= 1e-9 * expected);
    CHECK(tris.size() == static_cast<std::size_t>(n + hn));
  }
}

}  // TEST_SUITE
