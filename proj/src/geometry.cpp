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

#include "compod/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "compod/error.hpp"

namespace compod {

PlaneEq PlaneEq::from_coefficients(double a, double b, double c, double d) {
  const double len = std::sqrt(a * a + b * b + c * c);
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw DegenerateInput("plane normal has zero length");
  }
  return {Vec3(a / len, b / len, c / len), d / len};
}

PlaneEq PlaneEq::from_point_normal(const Vec3& point, const Vec3& normal) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw DegenerateInput("plane normal has zero length");
  const Vec3 n = normal / len;
  return {n, -n.dot(point)};
}

ToleranceContext::ToleranceContext(double diagonal, double rel)
    : bbox_diagonal(diagonal), eps_rel(rel) {
  if (!(rel > 0.0)) throw ValidationError("eps_rel must be positive");
  if (!(diagonal > 0.0)) bbox_diagonal = 1.0;
}

PointClassification classify_points(const PlaneEq& plane,
                                    std::span<const Vec3> points,
                                    const ToleranceContext& tol) {
  PointClassification out;
  const double eps = tol.eps_abs();
  for (std::size_t i = 0; i < points.size(); ++i) {
    switch (classify(plane, points[i], eps)) {
      case Side::Negative: out.left.push_back(static_cast<int>(i)); break;
      case Side::Positive: out.right.push_back(static_cast<int>(i)); break;
      case Side::On: out.on.push_back(static_cast<int>(i)); break;
    }
  }
  return out;
}

PlaneFrame::PlaneFrame(const PlaneEq& plane)
    : PlaneFrame(plane, -plane.d * plane.n) {}

PlaneFrame::PlaneFrame(const PlaneEq& plane, const Vec3& o)
    : origin(plane.project(o)), n(plane.n) {
  // Pick the axis least aligned with n to seed u.
  Vec3 seed = Vec3::UnitX();
  if (std::abs(n.y()) < std::abs(n.x()) && std::abs(n.y()) <= std::abs(n.z())) {
    seed = Vec3::UnitY();
  } else if (std::abs(n.z()) < std::abs(n.x())) {
    seed = Vec3::UnitZ();
  }
  u = seed.cross(n).normalized();
  v = n.cross(u);
}

double signed_area_2d(std::span<const Vec2> loop) {
  double a = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    a += cross2(loop[i], loop[(i + 1) % n]);
  }
  return 0.5 * a;
}

bool point_in_polygon_2d(const Vec2& p, std::span<const Vec2> loop) {
  bool inside = false;
  const std::size_t n = loop.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

std::vector<int> convex_hull_2d_indices(std::span<const Vec2> points,
                                        double eps) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw DegenerateInput("convex hull needs at least 3 points");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (points[a].x() != points[b].x()) return points[a].x() < points[b].x();
    return points[a].y() < points[b].y();
  });

  // Collinearity check against the line through the lexicographic extremes.
  const Vec2& first = points[order.front()];
  const Vec2& last = points[order.back()];
  const Vec2 dir = last - first;
  const double len = dir.norm();
  double width = 0.0;
  if (len > 0.0) {
    for (int i : order) {
      width = std::max(width, std::abs(cross2(dir, points[i] - first)) / len);
    }
  }
  if (len <= eps || width <= eps) {
    throw DegenerateInput("points are collinear");
  }

  std::vector<int> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && orient2d(points[hull[k - 2]], points[hull[k - 1]],
                              points[order[i]]) <= 0.0) {
      --k;
    }
    hull[k++] = order[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && orient2d(points[hull[k - 2]], points[hull[k - 1]],
                                  points[order[i]]) <= 0.0) {
      --k;
    }
    hull[k++] = order[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Vec2> convex_hull_2d(std::span<const Vec2> points, double eps) {
  std::vector<Vec2> out;
  for (int i : convex_hull_2d_indices(points, eps)) out.push_back(points[i]);
  return out;
}

Vec3 polygon_area_vector(std::span<const Vec3> loop) {
  Vec3 s = Vec3::Zero();
  const std::size_t n = loop.size();
  if (n < 3) return s;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    s += (loop[i] - loop[0]).cross(loop[i + 1] - loop[0]);
  }
  return s;
}

double polygon_area(std::span<const Vec3> loop) {
  return 0.5 * polygon_area_vector(loop).norm();
}

PlaneEq fit_plane(std::span<const Vec3> points) {
  if (points.size() < 3) throw DegenerateInput("plane fit needs 3 points");
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  c /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 r = p - c;
    cov += r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  return PlaneEq::from_point_normal(c, es.eigenvectors().col(0));
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double point_convex_polygon_distance(const Vec3& p, std::span<const Vec3> loop,
                                     const Vec3& normal) {
  const std::size_t n = loop.size();
  bool inside = true;
  for (std::size_t i = 0; i < n && inside; ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % n];
    if ((b - a).cross(p - a).dot(normal) < 0.0) inside = false;
  }
  if (inside) return std::abs((p - loop[0]).dot(normal));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(p, loop[i], loop[(i + 1) % n]));
  }
  return best;
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> clip_convex_polygon(
    std::span<const Vec3> loop, const PlaneEq& plane, double eps) {
  std::vector<Vec3> neg, pos;
  const std::size_t n = loop.size();
  std::vector<double> s(n);
  std::vector<int> side(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = signed_distance(plane, loop[i]);
    side[i] = s[i] > eps ? 1 : (s[i] < -eps ? -1 : 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (side[i] <= 0) neg.push_back(loop[i]);
    if (side[i] >= 0) pos.push_back(loop[i]);
    if (side[i] * side[j] < 0) {
      const double t = s[i] / (s[i] - s[j]);
      const Vec3 x = loop[i] + t * (loop[j] - loop[i]);
      neg.push_back(x);
      pos.push_back(x);
    }
  }
  if (neg.size() < 3) neg.clear();
  if (pos.size() < 3) pos.clear();
  return {std::move(neg), std::move(pos)};
}

}  // namespace compod
