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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <utility>
#include <vector>

namespace compod {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Point3 = Vec3;

/// Oriented plane {p : n.p + d = 0} with unit normal n.
struct PlaneEq {
  Vec3 n = Vec3::UnitZ();
  double d = 0.0;

  /// Normalizes (a, b, c, d). Throws DegenerateInput for a null normal.
  static PlaneEq from_coefficients(double a, double b, double c, double d);
  static PlaneEq from_point_normal(const Vec3& point, const Vec3& normal);

  PlaneEq flipped() const { return {-n, -d}; }
  Vec3 project(const Vec3& p) const { return p - (n.dot(p) + d) * n; }

  bool operator==(const PlaneEq& o) const { return n == o.n && d == o.d; }
};

inline double signed_distance(const PlaneEq& plane, const Vec3& p) {
  return plane.n.dot(p) + plane.d;
}

/// Numerical tolerances of one scene. eps_abs scales with the domain.
struct ToleranceContext {
  double bbox_diagonal = 1.0;
  double eps_rel = 1e-9;

  ToleranceContext() = default;
  ToleranceContext(double diagonal, double rel = 1e-9);

  double eps_abs() const { return eps_rel * bbox_diagonal; }
};

enum class Side : int { Negative = -1, On = 0, Positive = 1 };

inline Side classify(const PlaneEq& plane, const Vec3& p, double eps) {
  const double s = signed_distance(plane, p);
  if (s > eps) return Side::Positive;
  if (s < -eps) return Side::Negative;
  return Side::On;
}

struct PointClassification {
  std::vector<int> left;   // negative side
  std::vector<int> right;  // positive side
  std::vector<int> on;
};

PointClassification classify_points(const PlaneEq& plane,
                                    std::span<const Vec3> points,
                                    const ToleranceContext& tol);

/// Orthonormal frame of a plane used to move between 3D and in-plane 2D
/// coordinates. (u, v, n) is right-handed, so counter-clockwise in 2D is
/// counter-clockwise seen from the side n points to.
struct PlaneFrame {
  Vec3 origin;
  Vec3 u, v, n;

  explicit PlaneFrame(const PlaneEq& plane);
  PlaneFrame(const PlaneEq& plane, const Vec3& origin);

  Vec2 to_2d(const Vec3& p) const {
    const Vec3 r = p - origin;
    return {r.dot(u), r.dot(v)};
  }
  Vec3 to_3d(const Vec2& q) const { return origin + q.x() * u + q.y() * v; }
};

// 2D helpers.
inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross2(b - a, c - a);
}
double signed_area_2d(std::span<const Vec2> loop);
/// Strict containment by crossing parity; points on the boundary are
/// reported either way.
bool point_in_polygon_2d(const Vec2& p, std::span<const Vec2> loop);
double point_segment_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b);

/// Counter-clockwise convex hull without collinear points.
/// Throws DegenerateInput when fewer than 3 points or all collinear within
/// eps.
std::vector<Vec2> convex_hull_2d(std::span<const Vec2> points, double eps);
/// Index variant: returns indices into `points`.
std::vector<int> convex_hull_2d_indices(std::span<const Vec2> points,
                                        double eps);

// 3D polygon helpers.
/// Newell normal scaled by twice the area.
Vec3 polygon_area_vector(std::span<const Vec3> loop);
double polygon_area(std::span<const Vec3> loop);
/// Least-squares plane through points (unit normal by smallest-eigenvalue
/// eigenvector). Requires >= 3 points.
PlaneEq fit_plane(std::span<const Vec3> points);
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);
/// Distance from p to the convex planar polygon `loop`.
double point_convex_polygon_distance(const Vec3& p, std::span<const Vec3> loop,
                                     const Vec3& normal);

/// Splits a convex planar polygon by a plane. Vertices within eps of the
/// plane go to both sides. Parts with fewer than 3 vertices are returned
/// empty.
std::pair<std::vector<Vec3>, std::vector<Vec3>> clip_convex_polygon(
    std::span<const Vec3> loop, const PlaneEq& plane, double eps);

}  // namespace compod
