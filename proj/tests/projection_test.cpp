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
#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "dpd/core/random.hpp"
#include "dpd/core/vector_ops.hpp"
#include "dpd/usecases/projection.hpp"
#include "oracles.hpp"

namespace dpd {
namespace {

double sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(CapacitySimplex, FeasibleAfterClipping) {
  EXPECT_EQ(project_capacity_simplex(Vec{3.0, -1.0}, 4.0), (Vec{3.0, 0.0}));
}

TEST(CapacitySimplex, OnePassShift) {
  const Vec u = project_capacity_simplex(Vec{3.0, 2.0}, 4.0);
  EXPECT_NEAR(u[0], 2.5, 1e-15);
  EXPECT_NEAR(u[1], 1.5, 1e-15);
}

TEST(CapacitySimplex, TwoPassShift) {
  const Vec u = project_capacity_simplex(Vec{5.0, 0.2}, 4.0);
  EXPECT_NEAR(u[0], 4.0, 1e-15);
  EXPECT_EQ(u[1], 0.0);
}

TEST(CapacitySimplex, RejectsNonPositiveCapacity) {
  EXPECT_THROW(project_capacity_simplex(Vec{1.0}, 0.0), std::invalid_argument);
}

TEST(CapacitySimplex, MatchesKktOracleOnRandomInstances) {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  std::uniform_real_distribution<double> cap(0.1, 100.0), scale(0.1, 50.0), unit(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = size(rng);
    const double c = cap(rng), s = scale(rng);
    Vec v(n);
    for (double& x : v) x = s * unit(rng) + 0.3 * s;
    const Vec got = project_capacity_simplex(v, c);
    const Vec want = testing::capped_simplex_by_bisection(v, c);
    worst = std::max(worst, max_abs_diff(got, want));
    for (double x : got) ASSERT_GE(x, 0.0);
    ASSERT_LE(sum(got), c + 1e-12);
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(CapacitySimplex, IdempotentAndNonexpansive) {
  Rng rng(7);
  std::normal_distribution<double> g(1.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    Vec a(12), b(12);
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng);
    const Vec pa = project_capacity_simplex(a, 5.0);
    const Vec pb = project_capacity_simplex(b, 5.0);
    EXPECT_LE(max_abs_diff(project_capacity_simplex(pa, 5.0), pa), 1e-12);
    Vec da = pa, d = a;
    axpy(-1.0, pb, da);
    axpy(-1.0, b, d);
    EXPECT_LE(norm(da), norm(d) + 1e-12);
  }
}

TEST(CapacitySimplex, VariationalInequality) {
  // <v - P(v), u - P(v)> <= 0 for every feasible u
  Rng rng(8);
  std::normal_distribution<double> g(2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    Vec v(8);
    for (double& x : v) x = g(rng);
    const Vec pv = project_capacity_simplex(v, 3.0);
    for (int s = 0; s < 20; ++s) {
      Vec u(8);
      for (double& x : u) x = unit(rng);
      const double total = sum(u);
      if (total > 3.0) for (double& x : u) x *= 3.0 / total;
      double ip = 0.0;
      for (std::size_t i = 0; i < 8; ++i) ip += (v[i] - pv[i]) * (u[i] - pv[i]);
      EXPECT_LE(ip, 1e-10);
    }
  }
}

TEST(Simplex, MatchesBisectionOracle) {
  Rng rng(9);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int t = 0; t < 500; ++t) {
    Vec v(1 + t % 40);
    for (double& x : v) x = g(rng);
    const Vec got = project_simplex(v);
    EXPECT_LE(max_abs_diff(got, testing::simplex_by_bisection(v)), 1e-10);
    EXPECT_NEAR(sum(got), 1.0, 1e-12);
    for (double x : got) EXPECT_GE(x, 0.0);
    EXPECT_LE(max_abs_diff(project_simplex(got), got), 1e-12);
  }
}

TEST(Simplex, KnownCases) {
  EXPECT_EQ(project_simplex(Vec{0.2, 0.8}), (Vec{0.2, 0.8}));
  EXPECT_EQ(project_simplex(Vec{5.0}), (Vec{1.0}));
  const Vec w = project_simplex(Vec{1.0, 1.0, 1.0});
  for (double x : w) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(project_simplex(Vec{}), std::invalid_argument);
}

}  // namespace
}  // namespace dpd
