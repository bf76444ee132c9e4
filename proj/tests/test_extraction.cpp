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
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "compod/extraction.hpp"
#include "compod/hull.hpp"
#include "compod/io.hpp"
#include "compod/metrics.hpp"
#include "compod/synthetic.hpp"

using namespace compod;

namespace {

struct Pipeline {
  SyntheticScene scene;
  Arrangement arr;
  OccupancyLabels labels;
  explicit Pipeline(SyntheticScene sc) : scene(std::move(sc)) {
    arr = build_arrangement(scene.primitives, scene.cloud);
    labels = label_cells_normal(arr, scene.primitives, scene.cloud);
  }
};

Pipeline cube_pipeline() {
  SyntheticScene sc;
  sc.cloud = box_surface_cloud({Vec3::Zero(), Vec3::Ones()}, 12000, 7);
  sc.primitives = detect_planes(sc.cloud, {});
  sc.ground_truth = cell_surface(ConvexCell::box(Vec3::Zero(), Vec3::Ones()));
  return Pipeline(std::move(sc));
}

// Directed edge balance: every undirected edge is walked equally often in
// both directions.
bool balanced(const SurfaceMesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& f : m.facets) {
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const int u = f.loop[i], v = f.loop[(i + 1) % f.loop.size()];
      count[{std::min(u, v), std::max(u, v)}] += u < v ? 1 : -1;
    }
  }
  for (const auto& [k, c] : count) {
    if (c != 0) return false;
  }
  return true;
}

double boundary_length(const SurfaceMesh& m) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& f : m.facets) {
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const int u = f.loop[i], v = f.loop[(i + 1) % f.loop.size()];
      ++uses[{std::min(u, v), std::max(u, v)}];
    }
  }
  double len = 0.0;
  for (const auto& [e, n] : uses) {
    if (n == 1) len += (m.vertices[e.first] - m.vertices[e.second]).norm();
  }
  return len;
}

double inside_volume(const Arrangement& arr, const OccupancyLabels& l) {
  double v = 0.0;
  for (int leaf : arr.leaves()) {
    if (l.at(leaf) == Label::Inside) v += arr.nodes[leaf].cell.volume();
  }
  return v;
}

// Recursive oracle for the sibling merge.
Label uniform_label(const Arrangement& arr, const OccupancyLabels& l, int node) {
  const BspNode& n = arr.nodes[node];
  if (n.is_leaf()) return l.at(node);
  const Label a = uniform_label(arr, l, n.children[0]);
  const Label b = uniform_label(arr, l, n.children[1]);
  return a == b ? a : Label::Unknown;
}

void collect(const Arrangement& arr, const OccupancyLabels& l, int node, std::vector<int>& out) {
  if (uniform_label(arr, l, node) != Label::Unknown) {
    out.push_back(node);
    return;
  }
  for (int c : arr.nodes[node].children) collect(arr, l, c, out);
}

SurfaceMesh square_grid(const std::vector<std::pair<int, int>>& cells) {
  std::vector<std::pair<std::vector<Vec3>, int>> polys;
  for (const auto& [i, j] : cells) {
    polys.push_back({{Vec3(i, j, 0), Vec3(i + 1, j, 0), Vec3(i + 1, j + 1, 0), Vec3(i, j + 1, 0)}, 0});
  }
  return build_conforming_mesh(polys, 1e-9);
}

}  // namespace

TEST_CASE("cube surface") {
  const Pipeline p = cube_pipeline();
  const SurfaceMesh s = extract_surface(p.arr, p.labels);
  const MeshAudit a = audit_mesh(s);
  CHECK(a.vertices == 8);
  CHECK(a.edges == 12);
  CHECK(a.facets == 6);
  CHECK(a.euler_characteristic == 2);
  CHECK(a.watertight());
  CHECK(a.oriented());
  for (std::size_t f = 0; f < s.facets.size(); ++f) {
    Vec3 c = Vec3::Zero();
    for (const Vec3& v : s.polygon(f)) c += v;
    c /= static_cast<double>(s.facets[f].loop.size());
    CHECK(s.facet_normal(f).dot(c - Vec3::Constant(0.5)) > 0.4);
    CHECK(polygon_area(s.polygon(f)) == doctest::Approx(1.0).epsilon(1e-6));
  }
  const SurfaceMesh r = aggregate_facets(s, p.arr.tol);
  CHECK(r.facets.size() == 6);
  CHECK(audit_mesh(r).watertight());
}

TEST_CASE("all-outside labels give an empty surface") {
  const Pipeline p = cube_pipeline();
  OccupancyLabels l = p.labels;
  for (int leaf : p.arr.leaves()) l.by_node[leaf] = Label::Outside;
  CHECK(extract_surface(p.arr, l).empty());
}

TEST_CASE("extracted and remeshed surfaces are closed on random fixtures") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    const Pipeline p(random_box_scene(seed));
    const SurfaceMesh s = extract_surface(p.arr, p.labels);
    const MeshAudit a = audit_mesh(s);
    CHECK(a.watertight());
    CHECK(a.oriented());
    const SurfaceMesh r = aggregate_facets(s, p.arr.tol);
    const MeshAudit b = audit_mesh(r);
    CHECK(b.watertight());
    CHECK(b.oriented());
    CHECK(b.euler_characteristic == a.euler_characteristic);
    CHECK(r.facets.size() <= s.facets.size());
    CHECK(r.area() == doctest::Approx(s.area()).epsilon(1e-9));
    MetricOptions exact;
    exact.exact = true;
    CHECK(compare_surfaces(s, r, 2000, seed, exact).hd <= p.arr.tol.eps_abs());
  }
}

TEST_CASE("arbitrary labels still give a balanced surface") {
  const Pipeline p(random_box_scene(3));
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    OccupancyLabels l = p.labels;
    for (int leaf : p.arr.leaves()) {
      l.by_node[leaf] = (!p.arr.nodes[leaf].cell.touches_box() && rng() % 2) ? Label::Inside
                                                                            : Label::Outside;
    }
    const SurfaceMesh s = extract_surface(p.arr, l);
    if (s.empty()) continue;
    CHECK(audit_mesh(s).boundary_edges == 0);
    CHECK(balanced(s));
  }
}

TEST_CASE("the surface may close on the domain box") {
  const Pipeline p = cube_pipeline();
  OccupancyLabels l = p.labels;
  for (int leaf : p.arr.leaves()) l.by_node[leaf] = Label::Inside;
  const SurfaceMesh s = extract_surface(p.arr, l);
  const MeshAudit a = audit_mesh(s);
  CHECK(a.watertight());
  CHECK(a.oriented());
  CHECK(aggregate_facets(s, p.arr.tol).facets.size() == 6);
}

TEST_CASE("aggregate_facets examples") {
  const ToleranceContext tol(1.0);
  SUBCASE("two coplanar squares become one rectangle") {
    const SurfaceMesh m = square_grid({{0, 0}, {1, 0}});
    const SurfaceMesh r = aggregate_facets(m, tol);
    REQUIRE(r.facets.size() == 1);
    CHECK(r.facets[0].loop.size() == 4);
    CHECK(polygon_area(r.polygon(0)) == doctest::Approx(2.0));
  }
  SUBCASE("a ring around a hole is triangulated") {
    std::vector<std::pair<int, int>> ring;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i != 1 || j != 1) ring.push_back({i, j});
      }
    const SurfaceMesh m = square_grid(ring);
    const SurfaceMesh r = aggregate_facets(m, tol);
    double area = 0.0;
    for (std::size_t f = 0; f < r.facets.size(); ++f) {
      CHECK(r.facets[f].loop.size() == 3);
      CHECK(r.facet_normal(f).z() > 0.0);
      area += polygon_area(r.polygon(f));
    }
    CHECK(std::abs(area - 8.0) <= 1e-9);
    CHECK(boundary_length(r) == doctest::Approx(16.0));
  }
  SUBCASE("facets without a source are left alone") {
    SurfaceMesh m = square_grid({{0, 0}, {1, 0}});
    for (auto& f : m.facets) f.source = kNoSource;
    CHECK(aggregate_facets(m, tol).facets.size() == 2);
  }
  SUBCASE("a pinched cluster is left alone") {
    const SurfaceMesh m = square_grid({{0, 0}, {1, 1}});
    CHECK(aggregate_facets(m, tol).facets.size() == 2);
  }
}

TEST_CASE("merge_siblings") {
  const Pipeline p(random_box_scene(1));
  SUBCASE("matches the recursive oracle") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      OccupancyLabels l = p.labels;
      if (trial > 0) {
        for (int leaf : p.arr.leaves()) {
          l.by_node[leaf] = rng() % 4 == 0 ? Label::Inside : Label::Outside;
        }
      }
      const auto merged = merge_siblings(p.arr, l);
      std::vector<int> expected;
      collect(p.arr, l, p.arr.root, expected);
      std::sort(expected.begin(), expected.end());
      std::vector<int> got;
      double vol = 0.0;
      std::size_t leaves = 0;
      for (const auto& m : merged) {
        got.push_back(m.node);
        vol += p.arr.nodes[m.node].cell.volume();
        leaves += m.leaves.size();
      }
      CHECK(got == expected);
      CHECK(merged.size() <= p.arr.leaves().size());
      CHECK(leaves == p.arr.leaves().size());
      const double root = p.arr.nodes[p.arr.root].cell.volume();
      CHECK(std::abs(vol - root) <= 1e-9 * root);
    }
  }
  SUBCASE("all inside collapses to the root") {
    OccupancyLabels l = p.labels;
    for (int leaf : p.arr.leaves()) l.by_node[leaf] = Label::Inside;
    const auto merged = merge_siblings(p.arr, l);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].node == p.arr.root);
  }
  SUBCASE("a pair of inside siblings is replaced by the parent") {
    const ConvexCell box = ConvexCell::box(Vec3::Zero(), Vec3::Ones());
    const std::vector<PlaneEq> planes{{Vec3::UnitX(), -0.5}};
    const Arrangement arr = exhaustive_arrangement(planes, box, ToleranceContext(std::sqrt(3.0)));
    OccupancyLabels l = labels_of(arr);
    for (int leaf : arr.leaves()) l.by_node[leaf] = Label::Inside;
    CHECK(merge_siblings(arr, l).size() == 1);
    l.by_node[arr.leaves()[0]] = Label::Outside;
    CHECK(merge_siblings(arr, l).size() == 2);
  }
}

TEST_CASE("simplify_cells examples") {
  const ToleranceContext tol(std::sqrt(3.0));
  const std::vector<std::pair<int, int>> adj{{0, 1}};
  SUBCASE("two half cubes merge at tau zero") {
    std::vector<ConvexCell> cells{ConvexCell::box(Vec3(0, 0, 0), Vec3(0.5, 1, 1)),
                                  ConvexCell::box(Vec3(0.5, 0, 0), Vec3(1, 1, 1))};
    const auto d = simplify_cells(cells, {{0}, {1}}, adj, 0.0, tol);
    REQUIRE(d.cells.size() == 1);
    CHECK(d.cells[0].volume() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.provenance[0] == std::vector<int>{0, 1});
    CHECK_FALSE(d.overlap);
  }
  SUBCASE("an L pair only merges when tau exceeds the hull excess") {
    const std::vector<ConvexCell> cells{ConvexCell::box(Vec3(0, 0, 0), Vec3(2, 1, 1)),
                                        ConvexCell::box(Vec3(0, 1, 0), Vec3(1, 2, 1))};
    std::vector<Vec3> pts = cells[0].vertices();
    pts.insert(pts.end(), cells[1].vertices().begin(), cells[1].vertices().end());
    const double hull = cell_volume(convex_hull_3d(pts, tol));
    CHECK(hull == doctest::Approx(3.5));
    const double defect = hull - 3.0;
    CHECK(simplify_cells(cells, {}, adj, 0.0, tol).cells.size() == 2);
    CHECK(simplify_cells(cells, {}, adj, 0.4, tol).cells.size() == 2);
    const auto merged = simplify_cells(cells, {}, adj, 0.6, tol);
    CHECK((merged.cells.size() == 1) == (defect < 0.6));
    CHECK(merged.cells[0].volume() == doctest::Approx(3.5));
    CHECK(merged.overlap);
  }
  SUBCASE("non-adjacent cells never merge") {
    std::vector<ConvexCell> cells{ConvexCell::box(Vec3(0, 0, 0), Vec3(0.5, 1, 1)),
                                  ConvexCell::box(Vec3(0.5, 0, 0), Vec3(1, 1, 1))};
    CHECK(simplify_cells(cells, {}, {}, 0.0, tol).cells.size() == 2);
  }
}

TEST_CASE("tau zero decomposition is disjoint and volume preserving") {
  for (std::uint64_t seed : {0u, 3u, 8u}) {
    CAPTURE(seed);
    const Pipeline p(random_box_scene(seed));
    const auto merged = merge_siblings(p.arr, p.labels);
    const auto d = simplify_cells(p.arr, merged, 0.0);
    const double v = inside_volume(p.arr, p.labels);
    CHECK(std::abs(d.volume() - v) <= 1e-9 * v);
    CHECK_FALSE(d.overlap);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.3, 1.3);
    const double eps = p.arr.tol.eps_abs();
    for (int k = 0; k < 20000; ++k) {
      CHECK(d.containing(Vec3(u(rng), u(rng), u(rng)), eps) <= 1);
    }
    std::size_t prev = d.cells.size();
    for (double tau : {1e-4, 1e-3, 1e-2, 1e-1}) {
      const std::size_t n = simplify_cells(p.arr, merged, tau * v).cells.size();
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("decomposition export") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "compod_test_decomp";
  std::filesystem::create_directories(dir);
  ConvexDecomposition cube;
  cube.cells.push_back(ConvexCell::box(Vec3::Zero(), Vec3::Ones()));
  cube.provenance.push_back({3});
  const std::string obj = decomposition_to_obj(cube);
  std::size_t groups = 0, tris = 0;
  std::istringstream in(obj);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("g ", 0) == 0) ++groups;
    if (line.rfind("f ", 0) == 0) ++tris;
  }
  CHECK(groups == 1);
  CHECK(tris == 12);

  const Pipeline p(random_box_scene(5));
  const auto d = simplify_cells(p.arr, merge_siblings(p.arr, p.labels), 0.0);
  export_decomposition(d, dir / "d.json", DecompositionFormat::Json);
  const DecompositionRecord rec = decomposition_from_json(read_file((dir / "d.json").string()));
  REQUIRE(rec.halfspaces.size() == d.cells.size());
  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    REQUIRE(rec.halfspaces[c].size() == d.cells[c].halfspaces().size());
    for (std::size_t h = 0; h < rec.halfspaces[c].size(); ++h) {
      CHECK(rec.halfspaces[c][h] == d.cells[c].halfspaces()[h].outward_plane());
    }
    CHECK(rec.provenance[c] == d.provenance[c]);
  }
  export_decomposition(d, dir / "d.obj", DecompositionFormat::Obj);
  CHECK(std::filesystem::file_size(dir / "d.obj") > 0);

  ConvexDecomposition three;
  for (int i = 0; i < 3; ++i) three.cells.push_back(ConvexCell::box(Vec3(i, 0, 0), Vec3(i + 1, 1, 1)));
  CHECK(three.cells.size() == 3);
  CHECK(three.facet_count() == 18);
  std::filesystem::remove_all(dir);
}
