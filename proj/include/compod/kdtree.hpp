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

#include <span>
#include <utility>
#include <vector>

#include "compod/geometry.hpp"

namespace compod {

/// Static 3D kd-tree over a borrowed point array.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  /// Index and squared distance of the closest point. Ties go to the lower
  /// index. Requires a non-empty tree.
  std::pair<int, double> nearest(const Vec3& q) const;
  /// k nearest, sorted by (distance, index).
  std::vector<int> knn(const Vec3& q, int k) const;
  /// All points inside the axis-aligned box [lo, hi].
  void box_query(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const;

  std::size_t size() const { return index_.size(); }

 private:
  struct Node {
    int begin, end;  // range in index_
    int left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
    Vec3 lo, hi;
  };
  int build(int begin, int end);

  std::span<const Vec3> points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
};

}  // namespace compod
