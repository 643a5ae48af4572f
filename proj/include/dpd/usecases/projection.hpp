// Copyright 2026 The dpd-aircomp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

#include "dpd/core/vector_ops.hpp"

namespace dpd {

/// Euclidean projection onto { u >= 0, sum(u) <= capacity } by iterated
/// clipping and uniform shifting of the active set.
///
/// Each pass clips negatives, then removes the excess C' - C evenly from the
/// currently positive entries. An entry pushed below zero leaves the active
/// set on the next pass, so the loop runs at most N + 1 times and the whole
/// procedure is O(N^2).
inline Vec project_capacity_simplex(std::span<const double> u_in, double capacity) {
  if (!(capacity > 0.0)) throw std::invalid_argument("project_capacity_simplex: C must be positive");
  const std::size_t n = u_in.size();
  Vec u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::max(u_in[i], 0.0);

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (std::size_t pass = 0; pass <= n + 1; ++pass) {
    bool negative = false;
    double total = 0.0;
    for (double v : u) {
      if (v < 0.0) negative = true;
      total += std::max(v, 0.0);
    }
    if (!negative && total <= capacity + 8.0 * kEps * std::max(capacity, total)) break;

    for (double& v : u) v = std::max(v, 0.0);
    std::size_t active = 0;
    double active_sum = 0.0;
    for (double v : u) {
      if (v > 0.0) {
        ++active;
        active_sum += v;
      }
    }
    if (active_sum <= capacity) break;
    const double shift = (active_sum - capacity) / static_cast<double>(active);
    for (double& v : u) {
      if (v > 0.0) v -= shift;
    }
  }
  for (double& v : u) v = std::max(v, 0.0);
  return u;
}

/// Euclidean projection onto the probability simplex { w >= 0, sum(w) = 1 }
/// (sort-based threshold search).
inline Vec project_simplex(std::span<const double> v, double radius = 1.0) {
  const std::size_t n = v.size();
  if (n == 0) throw std::invalid_argument("project_simplex: empty input");
  Vec sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

}  // namespace dpd
