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
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpd/core/problem.hpp"
#include "dpd/usecases/projection.hpp"

namespace dpd::smart_grid {

/// PEV population and grid state for the demand-response stage.
///
/// Energies in MWh, prices per MWh. Primal vectors pack x = (u, y) where u are
/// the energy demands and y the epigraph variables of the utilities.
struct Params {
  Vec b;                  ///< battery parameters b_n > 0
  Vec s;                  ///< satisfaction parameters s_n > 0
  double capacity = 99;   ///< C
  double price = 0.0;     ///< p

  std::size_t size() const { return b.size(); }

  void validate() const {
    if (b.empty() || b.size() != s.size()) throw std::invalid_argument("smart_grid: b and s must be nonempty and equal length");
    for (double v : b) if (!(v > 0.0)) throw std::invalid_argument("smart_grid: b_n must be positive");
    for (double v : s) if (!(v > 0.0)) throw std::invalid_argument("smart_grid: s_n must be positive");
    if (!(capacity > 0.0)) throw std::invalid_argument("smart_grid: C must be positive");
    if (price < 0.0) throw std::invalid_argument("smart_grid: price must be nonnegative");
  }
};

/// U_n(u) = b u - s u^2 / 2 - p u
inline double pev_utility(double b, double s, double p, double u) {
  return b * u - 0.5 * s * u * u - p * u;
}

inline double grid_revenue(double p, std::span<const double> u) {
  return p * std::accumulate(u.begin(), u.end(), 0.0);
}

/// Grid price consistent with device n's optimal demand.
inline double optimal_price(double b_n, double s_n, double u_n_star) { return b_n - s_n * u_n_star; }

inline std::span<const double> demands(std::span<const double> x, std::size_t n) { return x.first(n); }
inline std::span<const double> epigraph(std::span<const double> x, std::size_t n) { return x.subspan(n, n); }

/// Epigraph form of the PEV stage: minimise -sum y_n subject to
/// y_n - U_n(u_n) <= 0 and (u, y) in X = { u >= 0, sum u <= C }.
inline ProblemSpec build_problem(const Params& params) {
  params.validate();
  const std::size_t n = params.size();
  ProblemSpec p;
  p.dimension = 2 * n;
  p.num_constraints = n;
  p.objective = [n](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s -= x[n + i];
    return s;
  };
  p.objective_subgradient = [n](std::span<const double> /*x*/) {
    Vec g(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) g[n + i] = -1.0;
    return g;
  };
  p.constraint = [params, n](std::size_t i, std::span<const double> x) {
    return x[n + i] - pev_utility(params.b[i], params.s[i], params.price, x[i]);
  };
  p.constraint_subgradient = [params, n](std::size_t i, std::span<const double> x) {
    Vec g(2 * n, 0.0);
    g[i] = -(params.b[i] - params.s[i] * x[i] - params.price);
    g[n + i] = 1.0;
    return g;
  };
  p.project = [capacity = params.capacity, n](std::span<const double> x) {
    Vec out(x.begin(), x.end());
    const Vec u = project_capacity_simplex(x.first(n), capacity);
    std::copy(u.begin(), u.end(), out.begin());
    return out;
  };
  return p;
}

struct OracleSolution {
  Vec u;
  double objective = 0.0;  ///< sum_n U_n(u_n)
  double multiplier = 0.0; ///< capacity multiplier mu
};

/// Socially optimal PEV demands from the KKT conditions:
/// u_n(mu) = max(0, (b_n - p - mu) / s_n), with mu >= 0 found by bisection so
/// that the capacity holds (mu = 0 when it is slack).
inline OracleSolution oracle(const Params& params) {
  params.validate();
  const std::size_t n = params.size();
  auto demand = [&](double mu) {
    Vec u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::max(0.0, (params.b[i] - params.price - mu) / params.s[i]);
    return u;
  };
  auto total = [](const Vec& u) { return std::accumulate(u.begin(), u.end(), 0.0); };

  double mu = 0.0;
  if (total(demand(0.0)) > params.capacity) {
    double lo = 0.0;
    double hi = *std::max_element(params.b.begin(), params.b.end());
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(demand(mid)) > params.capacity ? lo : hi) = mid;
    }
    mu = 0.5 * (lo + hi);
  }
  OracleSolution sol;
  sol.u = demand(mu);
  sol.multiplier = mu;
  for (std::size_t i = 0; i < n; ++i) {
    sol.objective += pev_utility(params.b[i], params.s[i], params.price, sol.u[i]);
  }
  return sol;
}

/// Primal point of the epigraph problem that corresponds to the oracle
/// optimum: (u*, U(u*)).
inline Vec oracle_point(const Params& params) {
  const OracleSolution sol = oracle(params);
  const std::size_t n = params.size();
  Vec x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = sol.u[i];
    x[n + i] = pev_utility(params.b[i], params.s[i], params.price, sol.u[i]);
  }
  return x;
}

enum class PriceRule { kLargestDemand, kMeanPositive };

/// Grid price read off a demand vector: b_n - s_n u_n for the device with the
/// largest demand, or the mean of that quantity over devices with positive
/// demand.
inline double price_from_demands(const Params& params, std::span<const double> u, PriceRule rule) {
  const std::size_t n = params.size();
  if (rule == PriceRule::kLargestDemand) {
    const std::size_t i = static_cast<std::size_t>(std::max_element(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n)) - u.begin());
    return optimal_price(params.b[i], params.s[i], u[i]);
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] > 0.0) {
      sum += optimal_price(params.b[i], params.s[i], u[i]);
      ++count;
    }
  }
  if (count == 0) return price_from_demands(params, u, PriceRule::kLargestDemand);
  return sum / static_cast<double>(count);
}

struct StackelbergStep {
  double price = 0.0;  ///< price in effect while the demands were computed
  Vec u;
  double revenue = 0.0;
};

struct StackelbergOutcome {
  std::vector<StackelbergStep> steps;
  double final_price = 0.0;
  bool converged = false;
};

struct StackelbergOptions {
  double relative_tolerance = 1e-3;
  std::size_t max_outer_iterations = 50;
  PriceRule rule = PriceRule::kLargestDemand;
};

/// Leader/follower iteration: solve the PEV stage at the current price, read
/// the new price off the demands, repeat until |dp| <= tol * p.
///
/// `solve_demands(params)` returns the PEV-stage demand vector u for
/// params.price; it is the distributed solver in practice and the oracle in
/// tests.
inline StackelbergOutcome stackelberg_loop(Params params,
                                           const std::function<Vec(const Params&)>& solve_demands,
                                           const StackelbergOptions& options = {}) {
  StackelbergOutcome out;
  for (std::size_t t = 0; t < options.max_outer_iterations; ++t) {
    StackelbergStep step;
    step.price = params.price;
    step.u = solve_demands(params);
    step.revenue = grid_revenue(params.price, step.u);
    const double next = std::max(0.0, price_from_demands(params, step.u, options.rule));
    out.steps.push_back(std::move(step));
    const double change = std::abs(next - params.price);
    params.price = next;
    if (change <= options.relative_tolerance * std::abs(out.steps.back().price)) {
      out.converged = true;
      break;
    }
  }
  out.final_price = params.price;
  return out;
}

}  // namespace dpd::smart_grid
