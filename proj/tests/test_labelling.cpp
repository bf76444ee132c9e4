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
#include <map>
#include <random>

#include "compod/error.hpp"
#include "compod/labelling.hpp"
#include "compod/synthetic.hpp"

using namespace compod;

namespace {

double brute_force_min(const std::vector<UnaryCost>& unary,
                       const std::vector<PairwiseTerm>& pairwise) {
  const int n = static_cast<int>(unary.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> labels(n);
  for (long mask = 0; mask < (1L << n); ++mask) {
    for (int i = 0; i < n; ++i) labels[i] = (mask >> i) & 1;
    best = std::min(best, labelling_energy(unary, pairwise, labels));
  }
  return best;
}

struct CubeFixture {
  PointCloud cloud = box_surface_cloud({Vec3::Zero(), Vec3::Ones()}, 12000, 7);
  std::vector<PlanarPrimitive> prims;
  Arrangement arr;
  CubeFixture() {
    prims = detect_planes(cloud, {});
    arr = build_arrangement(prims, cloud);
  }
  int inner() const {
    for (int l : arr.leaves()) {
      if (!arr.nodes[l].cell.touches_box()) return l;
    }
    return -1;
  }
};

SurfaceMesh unit_cube_mesh(const Vec3& lo = Vec3::Zero(), double size = 1.0) {
  return cell_surface(ConvexCell::box(lo, lo + Vec3::Constant(size)));
}

// Every quad facet split into four triangles around its centre.
SurfaceMesh refine(const SurfaceMesh& m) {
  SurfaceMesh out;
  out.vertices = m.vertices;
  for (std::size_t f = 0; f < m.facets.size(); ++f) {
    const auto& loop = m.facets[f].loop;
    Vec3 c = Vec3::Zero();
    for (int v : loop) c += m.vertices[v];
    out.vertices.push_back(c / static_cast<double>(loop.size()));
    const int ci = static_cast<int>(out.vertices.size()) - 1;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      out.facets.push_back({{loop[i], loop[(i + 1) % loop.size()], ci}, m.facets[f].source});
    }
  }
  return out;
}

std::size_t discontinuities(const Arrangement& arr, const OccupancyLabels& l) {
  std::size_t n = 0;
  for (int e : arr.graph.live_edges()) {
    const GraphEdge& g = arr.graph.edge(e);
    if (l.at(g.a) != l.at(g.b)) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("min_cut small examples") {
  SUBCASE("opposite unaries, no pairwise") {
    const std::vector<UnaryCost> u{{1.0, 0.0}, {0.0, 1.0}};
    const CutResult r = min_cut(u, {});
    CHECK(r.labels == std::vector<int>{1, 0});
    CHECK(r.energy == 0.0);
  }
  SUBCASE("everything prefers outside") {
    const std::vector<UnaryCost> u{{0.0, 1.0}, {0.0, 2.0}, {0.0, 0.5}};
    const std::vector<PairwiseTerm> p{{0, 1, 1.0}, {1, 2, 1.0}};
    const CutResult r = min_cut(u, p);
    CHECK(r.labels == std::vector<int>{0, 0, 0});
    CHECK(r.energy == 0.0);
  }
  SUBCASE("ties resolve to outside") {
    const std::vector<UnaryCost> u{{0.5, 0.5}};
    CHECK(min_cut(u, {}).labels == std::vector<int>{0});
  }
  SUBCASE("strong smoothing pulls a weak node along") {
    const std::vector<UnaryCost> u{{5.0, 0.0}, {0.4, 0.0}, {0.0, 0.3}};
    const std::vector<PairwiseTerm> p{{0, 1, 0.1}, {1, 2, 10.0}};
    const CutResult r = min_cut(u, p);
    CHECK(r.labels == std::vector<int>{1, 1, 1});
    CHECK(r.energy == doctest::Approx(0.3));
  }
  SUBCASE("negative pairwise") {
    const std::vector<UnaryCost> u{{0, 0}, {0, 0}};
    const std::vector<PairwiseTerm> p{{0, 1, -1.0}};
    CHECK_THROWS_AS(min_cut(u, p), NegativePairwise);
  }
}

TEST_CASE("min_cut matches exhaustive enumeration on random graphs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<UnaryCost> unary(n);
    for (auto& c : unary) c = {u(rng), u(rng)};
    std::vector<PairwiseTerm> pairwise;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (u(rng) < 0.4) pairwise.push_back({a, b, 0.6 * u(rng)});
      }
    const CutResult r = min_cut(unary, pairwise);
    CAPTURE(trial);
    CHECK(r.energy == brute_force_min(unary, pairwise));
    CHECK(r.energy == labelling_energy(unary, pairwise, r.labels));
  }
}

TEST_CASE("normal labelling of the cube") {
  const CubeFixture f;
  const OccupancyLabels l = label_cells_normal(f.arr, f.prims, f.cloud);
  const int inner = f.inner();
  REQUIRE(inner >= 0);
  for (int leaf : f.arr.leaves()) {
    CHECK(l.at(leaf) == (leaf == inner ? Label::Inside : Label::Outside));
  }
  CHECK(l.count(Label::Inside) == 1);
  CHECK_FALSE(l.empty_votes);

  PointCloud bare = f.cloud;
  bare.normals.clear();
  CHECK_THROWS_AS(label_cells_normal(f.arr, f.prims, bare), MissingNormals);
}

TEST_CASE("no votes leaves every cell outside") {
  const ConvexCell box = ConvexCell::box(Vec3::Zero(), Vec3::Ones());
  const std::vector<PlaneEq> planes{{Vec3::UnitX(), -0.5}, {Vec3::UnitY(), -0.5}};
  const Arrangement arr = exhaustive_arrangement(planes, box, ToleranceContext(std::sqrt(3.0)));
  const OccupancyLabels l = label_cells_normal(arr, {}, PointCloud{});
  CHECK(l.empty_votes);
  CHECK(l.count(Label::Outside) == arr.leaves().size());
}

TEST_CASE("lambda zero reduces to per-cell vote comparison") {
  for (std::uint64_t seed : {1u, 5u, 8u}) {
    CAPTURE(seed);
    const SyntheticScene sc = random_box_scene(seed);
    const Arrangement arr = build_arrangement(sc.primitives, sc.cloud);
    LabelConfig cfg;
    cfg.lambda = 0.0;
    const OccupancyLabels l = label_cells_normal(arr, sc.primitives, sc.cloud, cfg);

    // Brute-force votes over every inlier and every interface.
    const double r = cfg.vote_radius_frac * arr.tol.bbox_diagonal;
    std::map<int, double> vin, vout;
    std::vector<char> inlier(sc.cloud.points.size(), 0);
    for (const auto& p : sc.primitives)
      for (int i : p.inliers) inlier[i] = 1;
    for (int e : arr.graph.live_edges()) {
      const GraphEdge& g = arr.graph.edge(e);
      const Vec3 n = polygon_area_vector(g.polygon).normalized();
      for (std::size_t i = 0; i < inlier.size(); ++i) {
        if (!inlier[i]) continue;
        if (point_convex_polygon_distance(sc.cloud.points[i], g.polygon, n) > r) continue;
        const double a = sc.cloud.normals[i].dot(n);
        if (std::abs(a) < 0.5) continue;
        const int in_cell = a > 0 ? g.a : g.b, out_cell = a > 0 ? g.b : g.a;
        vin[in_cell] += 1;
        vout[out_cell] += 1;
      }
    }
    for (int leaf : arr.leaves()) {
      const bool boundary = arr.nodes[leaf].cell.touches_box();
      const bool inside = !boundary && vin[leaf] > vout[leaf];
      CHECK(l.at(leaf) == (inside ? Label::Inside : Label::Outside));
    }
  }
}

TEST_CASE("boundary cells stay outside and discontinuities shrink with lambda") {
  for (std::uint64_t seed : {0u, 3u, 7u}) {
    CAPTURE(seed);
    const SyntheticScene sc = random_box_scene(seed);
    const Arrangement arr = build_arrangement(sc.primitives, sc.cloud);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double lambda : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
      LabelConfig cfg;
      cfg.lambda = lambda;
      const OccupancyLabels l = label_cells_normal(arr, sc.primitives, sc.cloud, cfg);
      for (int leaf : arr.leaves()) {
        CHECK(l.at(leaf) != Label::Unknown);
        if (arr.nodes[leaf].cell.touches_box()) CHECK(l.at(leaf) == Label::Outside);
      }
      const std::size_t d = discontinuities(arr, l);
      CHECK(d <= prev);
      prev = d;
    }
  }
}

TEST_CASE("proxy labelling") {
  const CubeFixture f;
  const int inner = f.inner();

  SUBCASE("exact cube proxy") {
    const OccupancyLabels l = label_cells_proxy(f.arr, unit_cube_mesh());
    for (int leaf : f.arr.leaves()) {
      CHECK(l.at(leaf) == (leaf == inner ? Label::Inside : Label::Outside));
    }
    CHECK(l.margin[inner] == 1.0);
  }
  SUBCASE("refined proxy gives the same labels") {
    const SurfaceMesh coarse = unit_cube_mesh();
    const SurfaceMesh fine = refine(refine(coarse));
    CHECK(audit_mesh(fine).watertight());
    const OccupancyLabels a = label_cells_proxy(f.arr, coarse);
    const OccupancyLabels b = label_cells_proxy(f.arr, fine);
    CHECK(a.by_node == b.by_node);

    const SyntheticScene sc = l_prism_scene(2);
    const Arrangement arr = build_arrangement(sc.primitives, sc.cloud);
    CHECK(label_cells_proxy(arr, sc.ground_truth).by_node ==
          label_cells_proxy(arr, refine(sc.ground_truth)).by_node);
  }
  SUBCASE("proxy outside the domain") {
    const OccupancyLabels l = label_cells_proxy(f.arr, unit_cube_mesh(Vec3(5, 5, 5)));
    CHECK(l.count(Label::Outside) == f.arr.leaves().size());
  }
  SUBCASE("open proxy") {
    SurfaceMesh open = unit_cube_mesh();
    open.facets.pop_back();
    CHECK_THROWS_AS(label_cells_proxy(f.arr, open), OpenProxyMesh);
  }
}

TEST_CASE("proxy and normal labelling agree on box scenes") {
  for (std::uint64_t seed : {2u, 6u}) {
    const SyntheticScene sc = random_box_scene(seed);
    const Arrangement arr = build_arrangement(sc.primitives, sc.cloud);
    CHECK(label_cells_proxy(arr, sc.ground_truth).by_node ==
          label_cells_normal(arr, sc.primitives, sc.cloud).by_node);
  }
}

TEST_CASE("labels JSON round trip") {
  const CubeFixture f;
  const OccupancyLabels l = label_cells_normal(f.arr, f.prims, f.cloud);
  const std::string text = labels_to_json(f.arr, l);
  CHECK(labels_from_json(f.arr, text).by_node == l.by_node);
  CHECK_THROWS_AS(labels_from_json(f.arr, "{\"0\": \"in\"}"), ParseError);
  CHECK_THROWS_AS(labels_from_json(f.arr, "[1, 2"), ParseError);
}

TEST_CASE("LabelConfig validation") {
  LabelConfig c;
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.proxy_samples_per_cell = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
