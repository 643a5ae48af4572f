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

#include <cstddef>
#include <functional>
#include <span>

#include "dpd/core/vector_ops.hpp"

namespace dpd {

/// A constrained convex program
///
///   minimize f0(x)  subject to  f_i(x) <= 0, i = 0..N-1,  x in X,
///
/// where each device i owns one constraint f_i and the server owns f0 and the
/// projection onto the global set X. All maps must be convex; subgradient maps
/// return D-vectors.
struct ProblemSpec {
  std::size_t dimension = 0;
  std::size_t num_constraints = 0;

  std::function<double(std::span<const double>)> objective;
  std::function<Vec(std::span<const double>)> objective_subgradient;
  std::function<double(std::size_t, std::span<const double>)> constraint;
  std::function<Vec(std::size_t, std::span<const double>)> constraint_subgradient;
  std::function<Vec(std::span<const double>)> project;

  /// F(x) = (f_1(x), ..., f_N(x)).
  Vec constraint_values(std::span<const double> x) const {
    Vec out(num_constraints);
    for (std::size_t i = 0; i < num_constraints; ++i) out[i] = constraint(i, x);
    return out;
  }

  /// ||[F(x)]^+||
  double violation(std::span<const double> x) const {
    return positive_part_norm(constraint_values(x));
  }
};

/// Restricts a problem to a subset of its constraints (bottleneck devices
/// dropped). `kept` lists the original constraint indices to keep.
inline ProblemSpec restrict_constraints(const ProblemSpec& problem,
                                        std::vector<std::size_t> kept) {
  ProblemSpec out = problem;
  out.num_constraints = kept.size();
  out.constraint = [f = problem.constraint, kept](std::size_t i,
                                                  std::span<const double> x) {
    return f(kept.at(i), x);
  };
  out.constraint_subgradient = [g = problem.constraint_subgradient, kept](
                                   std::size_t i, std::span<const double> x) {
    return g(kept.at(i), x);
  };
  return out;
}

}  // namespace dpd
