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

#include "compod/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace compod {

namespace {
constexpr int kLeafSize = 12;

double box_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = std::max({lo[a] - q[a], 0.0, q[a] - hi[a]});
    d += e * e;
  }
  return d;
}
}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points) {
  index_.resize(points.size());
  std::iota(index_.begin(), index_.end(), 0);
  if (!index_.empty()) {
    nodes_.reserve(2 * points.size() / kLeafSize + 2);
    build(0, static_cast<int>(index_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0.0, Vec3::Zero(), Vec3::Zero()});
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[index_[i]]);
    hi = hi.cwiseMax(points_[index_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  if (end - begin <= kLeafSize) return id;
  int axis;
  (hi - lo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid,
                   index_.begin() + end, [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[index_[mid]][axis];
  const int l = build(begin, mid);
  const int r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

std::pair<int, double> KdTree::nearest(const Vec3& q) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(q, node.lo, node.hi) > best_d) continue;
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int p = index_[i];
        const double d = (points_[p] - q).squaredNorm();
        if (d < best_d || (d == best_d && p < best)) {
          best_d = d;
          best = p;
        }
      }
      continue;
    }
    // Visit the near child first (pushed last).
    if (q[node.axis] < node.split) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return {best, best_d};
}

std::vector<int> KdTree::knn(const Vec3& q, int k) const {
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry> heap;  // max-heap of current best
  std::vector<int> stack{0};
  if (nodes_.empty() || k <= 0) return {};
  auto worst = [&]() {
    return static_cast<int>(heap.size()) < k
               ? std::numeric_limits<double>::infinity()
               : heap.top().first;
  };
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(q, node.lo, node.hi) > worst()) continue;
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Entry e((points_[index_[i]] - q).squaredNorm(), index_[i]);
        if (static_cast<int>(heap.size()) < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      continue;
    }
    if (q[node.axis] < node.split) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::vector<int> out(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

void KdTree::box_query(const Vec3& lo, const Vec3& hi,
                       std::vector<int>& out) const {
  if (nodes_.empty()) return;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if ((node.lo.array() > hi.array()).any() ||
        (node.hi.array() < lo.array()).any()) {
      continue;
    }
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Vec3& p = points_[index_[i]];
        if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) {
          out.push_back(index_[i]);
        }
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
}

}  // namespace compod
