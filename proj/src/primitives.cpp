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

#include "compod/primitives.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "compod/error.hpp"
#include "compod/kdtree.hpp"

namespace compod {

namespace {

constexpr int kRefitInterval = 50;

struct LocalFrame {
  Vec3 normal;
  double curvature;
};

LocalFrame pca_frame(std::span<const Vec3> points, const std::vector<int>& ids) {
  Vec3 c = Vec3::Zero();
  for (int i : ids) c += points[i];
  c /= static_cast<double>(ids.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int i : ids) {
    const Vec3 r = points[i] - c;
    cov += r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Vec3 ev = es.eigenvalues();
  const double sum = ev.sum();
  return {es.eigenvectors().col(0), sum > 0.0 ? ev(0) / sum : 0.0};
}

// Spread of the points along the second principal axis within the plane.
double minor_spread(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  c /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 r = p - c;
    cov += r * r.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  return std::sqrt(std::max(0.0, es.eigenvalues()(1)));
}

}  // namespace

void PointCloud::validate() const {
  if (points.empty()) throw ValidationError("point cloud is empty");
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw ValidationError("non-finite point coordinate");
  }
  if (!normals.empty()) {
    if (normals.size() != points.size()) {
      throw ValidationError("normal count differs from point count");
    }
    for (const Vec3& n : normals) {
      if (std::abs(n.norm() - 1.0) > 1e-6) {
        throw ValidationError("normals must have unit length");
      }
    }
  }
}

void DetectionConfig::validate() const {
  if (!(fit_tol_frac > 0.0)) throw ValidationError("fit_tol_frac must be > 0");
  if (min_inliers < 3) throw ValidationError("min_inliers must be >= 3");
  if (knn < 3) throw ValidationError("knn must be >= 3");
  if (!(max_angle_deg > 0.0 && max_angle_deg <= 90.0)) {
    throw ValidationError("max_angle_deg must be in (0, 90]");
  }
}

double bbox_diagonal(std::span<const Vec3> points) {
  if (points.empty()) return 0.0;
  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<Vec3> estimate_normals(std::span<const Vec3> points, int knn,
                                   std::vector<double>* curvature) {
  const KdTree tree(points);
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(std::max<std::size_t>(points.size(), 1));
  std::vector<Vec3> normals(points.size(), Vec3::UnitZ());
  if (curvature) curvature->assign(points.size(), 0.0);
  const int k = std::min<int>(knn, static_cast<int>(points.size()));
  if (k < 3) return normals;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto ids = tree.knn(points[i], k);
    const LocalFrame f = pca_frame(points, ids);
    Vec3 n = f.normal.normalized();
    if (n.dot(points[i] - centroid) < 0.0) n = -n;
    normals[i] = n;
    if (curvature) (*curvature)[i] = f.curvature;
  }
  return normals;
}

std::vector<PlanarPrimitive> detect_planes(const PointCloud& cloud,
                                           const DetectionConfig& cfg) {
  cfg.validate();
  const auto& pts = cloud.points;
  const std::size_t n = pts.size();
  if (n == 0) return {};
  const double tol = cfg.fit_tol_frac * bbox_diagonal(pts);
  const double cos_max = std::cos(cfg.max_angle_deg * M_PI / 180.0);

  std::vector<double> curvature;
  std::vector<Vec3> normals = estimate_normals(pts, cfg.knn, &curvature);
  if (cloud.has_normals()) normals = cloud.normals;

  const KdTree tree(pts);
  const int k = std::min<int>(cfg.knn, static_cast<int>(n));
  std::vector<std::vector<int>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) neighbours[i] = tree.knn(pts[i], k);

  std::vector<int> seeds(n);
  std::iota(seeds.begin(), seeds.end(), 0);
  std::stable_sort(seeds.begin(), seeds.end(), [&](int a, int b) {
    return curvature[a] < curvature[b];
  });

  std::vector<int> owner(n, -1);
  std::vector<char> tried(n, 0);
  std::vector<int> stamp(n, -1);
  std::vector<PlanarPrimitive> out;
  int region_id = 0;

  auto accepts = [&](const PlaneEq& plane, int q) {
    return std::abs(signed_distance(plane, pts[q])) <= tol &&
           std::abs(normals[q].dot(plane.n)) >= cos_max;
  };

  for (int seed : seeds) {
    if (owner[seed] >= 0 || tried[seed]) continue;
    tried[seed] = 1;
    ++region_id;
    PlaneEq plane = PlaneEq::from_point_normal(pts[seed], normals[seed]);
    std::vector<int> region{seed};
    stamp[seed] = region_id;
    std::deque<int> frontier{seed};
    int since_refit = 0;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop_front();
      for (int q : neighbours[cur]) {
        if (owner[q] >= 0 || stamp[q] == region_id) continue;
        if (!accepts(plane, q)) continue;
        stamp[q] = region_id;
        region.push_back(q);
        frontier.push_back(q);
        if (++since_refit >= kRefitInterval) {
          since_refit = 0;
          std::vector<Vec3> rp;
          for (int r : region) rp.push_back(pts[r]);
          PlaneEq refit = fit_plane(rp);
          if (refit.n.dot(plane.n) < 0.0) refit = refit.flipped();
          plane = refit;
        }
      }
    }
    if (static_cast<int>(region.size()) < cfg.min_inliers) continue;

    // Final least-squares refit, drop points the refit rejects, refit again.
    std::vector<Vec3> rp;
    for (int r : region) rp.push_back(pts[r]);
    PlaneEq fitted = fit_plane(rp);
    std::vector<int> kept;
    for (int r : region) {
      if (accepts(fitted, r)) kept.push_back(r);
    }
    if (static_cast<int>(kept.size()) < cfg.min_inliers) continue;
    rp.clear();
    for (int r : kept) rp.push_back(pts[r]);
    fitted = fit_plane(rp);
    std::vector<int> final_set;
    for (int r : kept) {
      if (accepts(fitted, r)) final_set.push_back(r);
    }
    if (static_cast<int>(final_set.size()) < cfg.min_inliers) continue;
    rp.clear();
    for (int r : final_set) rp.push_back(pts[r]);
    // Strips along creases fit a plane but have no in-plane extent.
    if (minor_spread(rp) < tol) {
      for (int r : region) tried[r] = 1;
      continue;
    }

    PlanarPrimitive prim;
    prim.plane = fitted;
    std::sort(final_set.begin(), final_set.end());
    prim.inliers = final_set;
    int votes = 0;
    for (int r : final_set) votes += normals[r].dot(fitted.n) >= 0.0 ? 1 : -1;
    prim.orientation = votes >= 0 ? 1 : -1;
    for (int r : final_set) owner[r] = static_cast<int>(out.size());
    out.push_back(std::move(prim));
  }

  // Points near creases are grabbed by whichever region grew first, and their
  // normals are blurred across the crease. Hand each point to the nearest
  // plane among the owners of nearby points, then refit.
  for (int round = 0; round < 4 && out.size() > 1; ++round) {
    bool moved = false;
    std::vector<int> near;
    for (std::size_t i = 0; i < n; ++i) {
      const int cur = owner[i];
      if (cur < 0) continue;
      int best = cur;
      double best_d = std::abs(signed_distance(out[cur].plane, pts[i]));
      near.clear();
      const double reach =
          3.0 * (tol + (pts[neighbours[i].back()] - pts[i]).norm());
      tree.box_query(pts[i].array() - reach, pts[i].array() + reach, near);
      for (int q : near) {
        const int o = owner[q];
        if (o < 0 || o == best) continue;
        const double d = std::abs(signed_distance(out[o].plane, pts[i]));
        if (d < best_d) {
          best = o;
          best_d = d;
        }
      }
      if (best != cur) {
        owner[i] = best;
        moved = true;
      }
    }
    if (!moved) break;
    for (auto& prim : out) prim.inliers.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (owner[i] >= 0) out[owner[i]].inliers.push_back(static_cast<int>(i));
    }
    for (auto& prim : out) {
      if (prim.inliers.size() < 3) continue;
      std::vector<Vec3> rp;
      for (int r : prim.inliers) rp.push_back(pts[r]);
      PlaneEq refit = fit_plane(rp);
      if (refit.n.dot(prim.plane.n) < 0.0) refit = refit.flipped();
      prim.plane = refit;
    }
  }
  for (auto& prim : out) {
    std::erase_if(prim.inliers, [&](int r) {
      return std::abs(signed_distance(prim.plane, pts[r])) > tol;
    });
  }
  std::erase_if(out, [&](const PlanarPrimitive& p) {
    return static_cast<int>(p.inliers.size()) < cfg.min_inliers;
  });
  for (auto& prim : out) {
    int votes = 0;
    for (int r : prim.inliers) votes += normals[r].dot(prim.plane.n) >= 0.0 ? 1 : -1;
    prim.orientation = votes >= 0 ? 1 : -1;
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const PlanarPrimitive& a, const PlanarPrimitive& b) {
                     return a.inliers.size() > b.inliers.size();
                   });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

ConvexCell dilated_bbox(std::span<const Vec3> points, double padding_frac) {
  if (points.empty()) throw ValidationError("bounding box of no points");
  if (padding_frac < 0.0) throw ValidationError("padding must be >= 0");
  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  const double pad = padding_frac * diag;
  lo.array() -= pad;
  hi.array() += pad;
  const double eps = ToleranceContext(diag).eps_abs();
  for (int a = 0; a < 3; ++a) {
    if (hi[a] - lo[a] < eps) {
      lo[a] -= 0.5 * eps;
      hi[a] += 0.5 * eps;
    }
  }
  return ConvexCell::box(lo, hi);
}

void validate_primitives(std::span<const PlanarPrimitive> primitives,
                         std::size_t cloud_size) {
  for (const PlanarPrimitive& p : primitives) {
    if (p.inliers.empty()) {
      throw InvalidPrimitive(fmt::format("primitive {} has no inliers", p.id));
    }
    for (int i : p.inliers) {
      if (i < 0 || static_cast<std::size_t>(i) >= cloud_size) {
        throw InvalidPrimitive(fmt::format(
            "primitive {} references point {} but the cloud has {} points", p.id,
            i, cloud_size));
      }
    }
  }
}

std::vector<Vec3> primitive_hull(const PlanarPrimitive& primitive,
                                 const PointCloud& cloud, double eps) {
  const PlaneFrame frame(primitive.plane);
  std::vector<Vec2> flat;
  flat.reserve(primitive.inliers.size());
  for (int i : primitive.inliers) flat.push_back(frame.to_2d(cloud.points[i]));
  std::vector<Vec3> out;
  for (const Vec2& q : convex_hull_2d(flat, eps)) out.push_back(frame.to_3d(q));
  return out;
}

std::vector<Vec3> gather_inliers(std::span<const PlanarPrimitive> primitives,
                                 const PointCloud& cloud) {
  std::vector<Vec3> out;
  for (const PlanarPrimitive& p : primitives) {
    for (int i : p.inliers) out.push_back(cloud.points[i]);
  }
  return out;
}

}  // namespace compod
