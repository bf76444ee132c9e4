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

// Polygon-with-holes triangulation: holes are bridged into the outer loop,
// the result is ear-clipped, and Lawson flips over unconstrained edges turn
// it into the constrained Delaunay triangulation.

#include "compod/cdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "compod/error.hpp"

namespace compod {

namespace {

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c,
                    const Vec2& d) {
  const int o1 = sgn(orient2d(a, b, c)), o2 = sgn(orient2d(a, b, d));
  const int o3 = sgn(orient2d(c, d, a)), o4 = sgn(orient2d(c, d, b));
  if (o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0) {
    if (o1 == 0 && !on_segment(a, b, c)) return false;
    return true;
  }
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

struct Segment {
  int a, b;
};

void validate_loops(const std::vector<Vec2>& pts,
                    const std::vector<std::vector<int>>& loops) {
  std::vector<Segment> segs;
  for (const auto& loop : loops) {
    if (loop.size() < 3) throw InvalidLoops("loop has fewer than 3 vertices");
    for (std::size_t i = 0; i < loop.size(); ++i) {
      segs.push_back({loop[i], loop[(i + 1) % loop.size()]});
    }
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Segment& s = segs[i];
      const Segment& t = segs[j];
      const bool shared = s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b;
      if (shared) {
        // Adjacent edges may only meet at their common vertex.
        const int common = (s.a == t.a || s.a == t.b) ? s.a : s.b;
        const int so = s.a == common ? s.b : s.a;
        const int to = t.a == common ? t.b : t.a;
        if (so == to) throw InvalidLoops("duplicate edge");
        const Vec2& c = pts[common];
        if (orient2d(c, pts[so], pts[to]) == 0.0 &&
            (pts[so] - c).dot(pts[to] - c) > 0.0) {
          throw InvalidLoops("loop folds back on itself");
        }
        continue;
      }
      if (segments_touch(pts[s.a], pts[s.b], pts[t.a], pts[t.b])) {
        throw InvalidLoops("loop edges intersect");
      }
    }
  }
}

// Sequence position of `v` whose interior wedge contains m.
bool in_wedge(const Vec2& prev, const Vec2& v, const Vec2& next,
              const Vec2& m) {
  const double a = orient2d(v, next, m);
  const double b = orient2d(prev, v, m);
  if (orient2d(prev, v, next) >= 0.0) return a >= 0.0 && b >= 0.0;
  return a >= 0.0 || b >= 0.0;
}

void bridge_hole(const std::vector<Vec2>& pts, std::vector<int>& seq,
                 const std::vector<int>& hole) {
  std::size_t hm = 0;
  for (std::size_t i = 1; i < hole.size(); ++i) {
    const Vec2& p = pts[hole[i]];
    const Vec2& q = pts[hole[hm]];
    if (p.x() > q.x() || (p.x() == q.x() && p.y() > q.y())) hm = i;
  }
  const Vec2 m = pts[hole[hm]];

  // Closest hit of the +x ray from m.
  double best_x = std::numeric_limits<double>::infinity();
  std::size_t best_edge = seq.size();
  int hit_vertex = -1;
  const std::size_t n = seq.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = pts[seq[k]];
    const Vec2& b = pts[seq[(k + 1) % n]];
    if ((a.y() > m.y()) == (b.y() > m.y()) && a.y() != m.y() && b.y() != m.y()) {
      continue;
    }
    if (a.y() == b.y()) {
      if (a.y() != m.y()) continue;
      const double x = std::min(a.x(), b.x());
      if (x >= m.x() && x < best_x) {
        best_x = x;
        best_edge = k;
        hit_vertex = a.x() <= b.x() ? static_cast<int>(k)
                                    : static_cast<int>((k + 1) % n);
      }
      continue;
    }
    const double t = (m.y() - a.y()) / (b.y() - a.y());
    if (t < 0.0 || t > 1.0) continue;
    const double x = a.x() + t * (b.x() - a.x());
    if (x < m.x() || x >= best_x) continue;
    best_x = x;
    best_edge = k;
    hit_vertex = -1;
    if (t == 0.0) hit_vertex = static_cast<int>(k);
    if (t == 1.0) hit_vertex = static_cast<int>((k + 1) % n);
  }
  if (best_edge == seq.size()) throw InvalidLoops("hole is not enclosed");

  std::size_t pos;
  if (hit_vertex >= 0) {
    pos = static_cast<std::size_t>(hit_vertex);
  } else {
    const std::size_t ka = best_edge, kb = (best_edge + 1) % n;
    pos = pts[seq[ka]].x() > pts[seq[kb]].x() ? ka : kb;
    const Vec2 ipt(best_x, m.y());
    const Vec2 p = pts[seq[pos]];
    // Vertices inside triangle (m, ipt, p) block visibility; take the one
    // with the smallest angle to the ray.
    const bool ccw = orient2d(m, ipt, p) > 0.0;
    double best_angle = std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& q = pts[seq[k]];
      if (seq[k] == seq[pos]) continue;
      const double o1 = orient2d(m, ipt, q), o2 = orient2d(ipt, p, q),
                   o3 = orient2d(p, m, q);
      const bool inside = ccw ? (o1 >= 0 && o2 >= 0 && o3 >= 0)
                              : (o1 <= 0 && o2 <= 0 && o3 <= 0);
      if (!inside || q.x() < m.x()) continue;
      const Vec2 d = q - m;
      const double angle = std::abs(std::atan2(d.y(), d.x()));
      const double dist = d.squaredNorm();
      if (angle < best_angle || (angle == best_angle && dist < best_dist)) {
        best_angle = angle;
        best_dist = dist;
        pos = k;
      }
    }
  }
  // Among duplicate occurrences pick the one whose wedge faces m.
  const int target = seq[pos];
  for (std::size_t k = 0; k < n; ++k) {
    if (seq[k] != target) continue;
    if (in_wedge(pts[seq[(k + n - 1) % n]], pts[seq[k]], pts[seq[(k + 1) % n]],
                 m)) {
      pos = k;
      break;
    }
  }

  std::vector<int> out(seq.begin(), seq.begin() + pos + 1);
  for (std::size_t i = 0; i <= hole.size(); ++i) {
    out.push_back(hole[(hm + i) % hole.size()]);
  }
  out.push_back(seq[pos]);
  out.insert(out.end(), seq.begin() + pos + 1, seq.end());
  seq = std::move(out);
}

bool in_triangle_closed(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& p) {
  return orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 &&
         orient2d(c, a, p) >= 0.0;
}

std::vector<Triangle> ear_clip(const std::vector<Vec2>& pts,
                               const std::vector<int>& seq) {
  const int n = static_cast<int>(seq.size());
  std::vector<int> next(n), prev(n);
  for (int i = 0; i < n; ++i) {
    next[i] = (i + 1) % n;
    prev[i] = (i + n - 1) % n;
  }
  std::vector<Triangle> tris;
  int remaining = n;
  int cur = 0;
  int stall = 0;
  auto is_ear = [&](int i, bool strict) {
    const int a = seq[prev[i]], b = seq[i], c = seq[next[i]];
    if (orient2d(pts[a], pts[b], pts[c]) <= 0.0) return false;
    if (!strict) return true;
    for (int k = next[next[i]]; k != prev[i]; k = next[k]) {
      const int q = seq[k];
      if (q == a || q == b || q == c) continue;
      if (pts[q] == pts[a] || pts[q] == pts[b] || pts[q] == pts[c]) continue;
      if (in_triangle_closed(pts[a], pts[b], pts[c], pts[q])) return false;
    }
    return true;
  };
  while (remaining > 3) {
    bool strict = stall < remaining;
    if (is_ear(cur, strict || stall < 2 * remaining)) {
      tris.push_back({seq[prev[cur]], seq[cur], seq[next[cur]]});
      next[prev[cur]] = next[cur];
      prev[next[cur]] = prev[cur];
      cur = next[cur];
      --remaining;
      stall = 0;
      continue;
    }
    cur = next[cur];
    if (++stall > 3 * remaining) {
      // No valid ear: only degenerate slivers remain.
      break;
    }
  }
  if (remaining == 3) {
    const int a = seq[prev[cur]], b = seq[cur], c = seq[next[cur]];
    if (orient2d(pts[a], pts[b], pts[c]) > 0.0) tris.push_back({a, b, c});
  }
  return tris;
}

bool in_circle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                     (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                     (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  const double scale = (adx * adx + ady * ady) * (bdx * bdx + bdy * bdy +
                                                  cdx * cdx + cdy * cdy);
  return det > 1e-12 * scale;
}

void lawson_flip(const std::vector<Vec2>& pts, std::vector<Triangle>& tris,
                 const std::set<std::pair<int, int>>& constrained) {
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  std::map<std::pair<int, int>, std::vector<int>> edge_tris;
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      edge_tris[key(tris[t][k], tris[t][(k + 1) % 3])].push_back(t);
    }
  }
  std::vector<std::pair<int, int>> stack;
  for (const auto& [e, ts] : edge_tris) {
    if (ts.size() == 2 && !constrained.count(e)) stack.push_back(e);
  }
  auto remove_tri = [&](int t) {
    for (int k = 0; k < 3; ++k) {
      auto& v = edge_tris[key(tris[t][k], tris[t][(k + 1) % 3])];
      v.erase(std::remove(v.begin(), v.end(), t), v.end());
    }
  };
  auto add_tri = [&](int t) {
    for (int k = 0; k < 3; ++k) {
      edge_tris[key(tris[t][k], tris[t][(k + 1) % 3])].push_back(t);
    }
  };
  std::size_t guard = 0;
  const std::size_t max_flips = 50 * tris.size() * tris.size() + 100;
  while (!stack.empty() && guard++ < max_flips) {
    const auto e = stack.back();
    stack.pop_back();
    auto it = edge_tris.find(e);
    if (it == edge_tris.end() || it->second.size() != 2) continue;
    const int t1 = it->second[0], t2 = it->second[1];
    // Rotate t1 so that it reads (a, b, c) with edge (a, b).
    auto rotate_to = [&](int t, int a, int b) {
      Triangle tri = tris[t];
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == a && tri[(k + 1) % 3] == b) {
          return Triangle{tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]};
        }
      }
      return Triangle{-1, -1, -1};
    };
    Triangle x = rotate_to(t1, e.first, e.second);
    if (x[0] < 0) x = rotate_to(t1, e.second, e.first);
    const int a = x[0], b = x[1], c = x[2];
    const Triangle y = rotate_to(t2, b, a);
    if (y[0] < 0) continue;
    const int d = y[2];
    if (!in_circle(pts[a], pts[b], pts[c], pts[d])) continue;
    if (orient2d(pts[c], pts[a], pts[d]) <= 0.0 ||
        orient2d(pts[d], pts[b], pts[c]) <= 0.0) {
      continue;
    }
    remove_tri(t1);
    remove_tri(t2);
    tris[t1] = {c, a, d};
    tris[t2] = {d, b, c};
    add_tri(t1);
    add_tri(t2);
    for (const auto& f : {key(a, c), key(a, d), key(b, d), key(b, c)}) {
      if (!constrained.count(f)) stack.push_back(f);
    }
  }
}

}  // namespace

std::vector<Triangle> constrained_delaunay_2d(
    std::span<const Vec2> outer, std::span<const std::vector<Vec2>> holes) {
  std::vector<Vec2> pts(outer.begin(), outer.end());
  std::vector<std::vector<int>> loops;
  auto add_loop = [&](std::span<const Vec2> l, std::size_t base) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < l.size(); ++i) ids.push_back(static_cast<int>(base + i));
    loops.push_back(std::move(ids));
  };
  add_loop(outer, 0);
  for (const auto& h : holes) {
    const std::size_t base = pts.size();
    pts.insert(pts.end(), h.begin(), h.end());
    add_loop(h, base);
  }
  validate_loops(pts, loops);

  auto loop_area = [&](const std::vector<int>& loop) {
    std::vector<Vec2> l;
    for (int i : loop) l.push_back(pts[i]);
    return signed_area_2d(l);
  };
  if (loop_area(loops[0]) == 0.0) throw InvalidLoops("outer loop has no area");
  if (loop_area(loops[0]) < 0.0) std::reverse(loops[0].begin(), loops[0].end());
  std::vector<Vec2> outer_ccw;
  for (int i : loops[0]) outer_ccw.push_back(pts[i]);
  for (std::size_t h = 1; h < loops.size(); ++h) {
    if (loop_area(loops[h]) > 0.0) std::reverse(loops[h].begin(), loops[h].end());
    if (!point_in_polygon_2d(pts[loops[h][0]], outer_ccw)) {
      throw InvalidLoops("hole lies outside the outer loop");
    }
    std::vector<Vec2> hv;
    for (int i : loops[h]) hv.push_back(pts[i]);
    for (std::size_t g = 1; g < loops.size(); ++g) {
      if (g == h) continue;
      if (point_in_polygon_2d(pts[loops[g][0]], hv)) {
        throw InvalidLoops("nested holes");
      }
    }
  }

  std::vector<int> seq = loops[0];
  std::vector<std::size_t> order;
  for (std::size_t h = 1; h < loops.size(); ++h) order.push_back(h);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto maxx = [&](std::size_t l) {
      double x = -std::numeric_limits<double>::infinity();
      for (int i : loops[l]) x = std::max(x, pts[i].x());
      return x;
    };
    return maxx(a) > maxx(b);
  });
  for (std::size_t h : order) bridge_hole(pts, seq, loops[h]);

  std::vector<Triangle> tris = ear_clip(pts, seq);
  std::set<std::pair<int, int>> constrained;
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i], b = loop[(i + 1) % loop.size()];
      constrained.emplace(std::min(a, b), std::max(a, b));
    }
  }
  lawson_flip(pts, tris, constrained);
  return tris;
}

}  // namespace compod
