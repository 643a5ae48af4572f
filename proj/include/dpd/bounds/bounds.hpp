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
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpd/core/primal_dual.hpp"
#include "dpd/core/solver.hpp"
#include "dpd/core/vector_ops.hpp"

namespace dpd {

/// Constants and per-round sequences entering the convergence bounds.
struct BoundInputs {
  double G = 0.0;  ///< bound on ||lambda_i g_i||
  double L = 0.0;  ///< bound on the Lagrangian subgradients, L > G
  double R = 0.0;  ///< bound on ||x^k - x*||
  double x0_gap2 = 0.0;        ///< E||x_0 - x*||^2
  double lambda0_norm2 = 0.0;  ///< E||lambda^0||^2
  double zeta = 0.0;           ///< (f0(x_bar) - q) / gamma
  Vec steps;                   ///< a_0, a_1, ...
  Vec abar;                    ///< mean participants per round, same length as steps
  double beta = 1.0;
  double sigma2 = 0.0;
  double N = 1.0;

  void validate() const {
    if (G < 0.0 || L < 0.0 || R < 0.0 || x0_gap2 < 0.0 || lambda0_norm2 < 0.0 || zeta < 0.0) {
      throw std::invalid_argument("BoundInputs: constants must be nonnegative");
    }
    if (L < G) throw std::invalid_argument("BoundInputs: need L >= G");
    require_same_size(steps.size(), abar.size(), "BoundInputs(abar)");
    for (double a : abar) {
      if (a < 0.0 || a > N + 1e-9) throw std::invalid_argument("BoundInputs: abar outside [0, N]");
    }
  }
};

/// Running sums over j < k shared by every bound.
struct BoundSums {
  double z = 0.0;          ///< sum a_j
  double a2 = 0.0;         ///< sum a_j^2
  double miss_a = 0.0;     ///< sum (N - abar_j) a_j
  double miss_a2 = 0.0;    ///< sum (N - abar_j) a_j^2
  double miss2_a2 = 0.0;   ///< sum (N - abar_j)^2 a_j^2

  void add(double a, double missing) {
    z += a;
    a2 += a * a;
    miss_a += missing * a;
    miss_a2 += missing * a * a;
    miss2_a2 += missing * missing * a * a;
  }
};

inline BoundSums bound_sums(const BoundInputs& in, std::size_t k) {
  if (k > in.steps.size()) throw std::out_of_range("bound_sums: k beyond recorded steps");
  BoundSums s;
  for (std::size_t j = 0; j < k; ++j) s.add(in.steps[j], in.N - in.abar[j]);
  return s;
}

namespace detail {

// Terms common to the violation bound and the upper gap bound, without the
// leading 1/Z_k.
inline double noise_and_drift(const BoundInputs& in, const BoundSums& s) {
  return (in.beta * in.sigma2 + 1.5 * in.L * in.L) * s.a2 + 2.0 * in.L * in.G * s.miss_a2 +
         in.L * in.L * s.miss2_a2;
}

inline void require_positive_z(const BoundSums& s, const char* what) {
  if (!(s.z > 0.0)) throw UndefinedAverageError(what);
}

}  // namespace detail

inline double delta_k(const BoundInputs& in, const BoundSums& s) {
  detail::require_positive_z(s, "delta_k: Z_k = 0");
  return (in.R * in.G * s.miss_a + in.x0_gap2 + detail::noise_and_drift(in, s)) / s.z;
}

inline double delta_k(const BoundInputs& in, std::size_t k) { return delta_k(in, bound_sums(in, k)); }

/// Upper bound on E||[F(x_hat^k)]^+|| for dual radius r.
inline double constraint_violation_bound(const BoundInputs& in, double r, const BoundSums& s) {
  detail::require_positive_z(s, "constraint_violation_bound: Z_k = 0");
  if (!(r > 0.0)) throw std::invalid_argument("constraint_violation_bound: r must be positive");
  const double zr = in.zeta + r;
  return (in.R * in.G * s.miss_a + 2.0 * zr * zr + in.x0_gap2 + detail::noise_and_drift(in, s)) /
         (r * s.z);
}

inline double constraint_violation_bound(const BoundInputs& in, double r, std::size_t k) {
  return constraint_violation_bound(in, r, bound_sums(in, k));
}

/// Upper bound on E[f0(x_hat^k)] - f0*. The last term does not vanish under
/// partial participation.
inline double optimality_gap_upper(const BoundInputs& in, const BoundSums& s) {
  detail::require_positive_z(s, "optimality_gap_upper: Z_k = 0");
  const double rg = in.R * in.G;
  const double inner = 0.5 * in.lambda0_norm2 + in.x0_gap2 + detail::noise_and_drift(in, s);
  return rg / s.z * inner + rg / s.z * s.miss_a;
}

inline double optimality_gap_upper(const BoundInputs& in, std::size_t k) {
  return optimality_gap_upper(in, bound_sums(in, k));
}

/// Lower bound on E[f0(x_hat^k)] - f0*.
inline double optimality_gap_lower(double zeta, double violation) {
  if (violation < 0.0) throw std::invalid_argument("optimality_gap_lower: negative violation");
  return -zeta * violation;
}

struct BoundRow {
  std::size_t round = 0;
  double delta = 0.0;
  double r_star = 0.0;
  double violation_bound = 0.0;
  double gap_upper = 0.0;
  double gap_lower = 0.0;  ///< NaN when no violation was supplied
};

/// All bounds for k = 1..steps.size(), with r = r*_k. `violation_mean[k-1]`
/// feeds the lower gap bound at round k when supplied.
inline std::vector<BoundRow> evaluate_bounds(const BoundInputs& in,
                                             std::span<const double> violation_mean = {}) {
  in.validate();
  std::vector<BoundRow> rows;
  rows.reserve(in.steps.size());
  BoundSums s;
  for (std::size_t j = 0; j < in.steps.size(); ++j) {
    s.add(in.steps[j], in.N - in.abar[j]);
    BoundRow row;
    row.round = j + 1;
    row.delta = delta_k(in, s);
    row.r_star = optimal_r(in.zeta, row.delta, s.z);
    row.violation_bound = constraint_violation_bound(in, row.r_star, s);
    row.gap_upper = optimality_gap_upper(in, s);
    row.gap_lower = j < violation_mean.size() ? optimality_gap_lower(in.zeta, violation_mean[j])
                                              : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

/// Constants estimated from instrumented solver traces.
struct EstimatedConstants {
  double G = 0.0;
  double L = 0.0;
  double R = 0.0;
  double x0_gap2 = 0.0;
};

inline constexpr double kConstantInflation = 1.05;

/// Empirical surrogates for G, L, R and E||x_0 - x*||^2. Traces must carry
/// iterates and diagnostics. Maxima are inflated by kConstantInflation.
inline std::optional<EstimatedConstants> estimate_constants(std::span<const SolverTrace> traces,
                                                            std::span<const double> x_star) {
  if (traces.empty() || x_star.empty()) return std::nullopt;
  EstimatedConstants c;
  std::size_t with_start = 0;
  for (const SolverTrace& t : traces) {
    for (const RoundDiagnostics& d : t.diagnostics) {
      c.G = std::max(c.G, d.max_weighted_subgradient);
      c.L = std::max({c.L, d.lagrangian_x_norm, d.lagrangian_lambda_norm});
    }
    for (const Vec& x : t.iterates) c.R = std::max(c.R, distance(x, x_star));
    if (!t.iterates.empty()) {
      const double d = distance(t.iterates.front(), x_star);
      c.x0_gap2 += d * d;
      ++with_start;
    }
  }
  if (with_start > 0) c.x0_gap2 /= static_cast<double>(with_start);
  // L covers ||g0 + sum lambda_i g_i|| but not every single lambda_i g_i;
  // keep the assumption L >= G explicit.
  c.L = std::max(c.L, c.G);
  c.G *= kConstantInflation;
  c.L *= kConstantInflation;
  c.R *= kConstantInflation;
  if (c.L < c.G) throw std::logic_error("estimate_constants: L < G");
  return c;
}

}  // namespace dpd
