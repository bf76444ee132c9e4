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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "compod/geometry.hpp"

namespace compod::testing {

inline std::size_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Planes whose every triple meets well inside [-10, 10]^3.
inline std::vector<PlaneEq> generic_planes(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    std::vector<PlaneEq> planes;
    for (int i = 0; i < n; ++i) {
      planes.push_back(PlaneEq::from_point_normal(Vec3::Zero(), Vec3(g(rng), g(rng), g(rng))));
      planes.back().d = u(rng);
    }
    bool ok = true;
    for (int a = 0; a < n && ok; ++a)
      for (int b = a + 1; b < n && ok; ++b) {
        if (planes[a].n.cross(planes[b].n).norm() < 0.1) ok = false;
        for (int c = b + 1; c < n && ok; ++c) {
          Eigen::Matrix3d m;
          m.row(0) = planes[a].n;
          m.row(1) = planes[b].n;
          m.row(2) = planes[c].n;
          if (std::abs(m.determinant()) < 0.05) {
            ok = false;
            break;
          }
          const Vec3 p = m.lu().solve(Vec3(-planes[a].d, -planes[b].d, -planes[c].d));
          if (p.cwiseAbs().maxCoeff() > 9.0) ok = false;
        }
      }
    if (ok) return planes;
  }
}

}  // namespace compod::testing
