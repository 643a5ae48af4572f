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

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpd/core/primal_dual.hpp"
#include "dpd/core/problem.hpp"
#include "dpd/core/random.hpp"
#include "dpd/core/vector_ops.hpp"

namespace dpd {

/// What the server obtains from one uplink round.
struct RoundAggregate {
  Vec value;                     ///< estimate of sum_i s_i
  std::size_t participants = 0;  ///< |A^k|
  double duration_s = 0.0;       ///< airtime consumed by the round
};

/// An uplink that turns the devices' messages s_i into an estimate of their sum.
template <typename C>
concept AggregationChannel = requires(C& channel, std::span<const Vec> messages, Rng& rng) {
  { channel.transmit(messages, rng) } -> std::same_as<RoundAggregate>;
};

/// Exact sum with every device heard and no airtime.
struct PerfectChannel {
  double round_duration_s = 0.0;

  RoundAggregate transmit(std::span<const Vec> messages, Rng& /*rng*/) const {
    RoundAggregate out;
    if (messages.empty()) return out;
    out.value.assign(messages.front().size(), 0.0);
    for (const Vec& s : messages) axpy(1.0, s, out.value);
    out.participants = messages.size();
    out.duration_s = round_duration_s;
    return out;
  }
};

struct RoundRecord {
  std::size_t round = 0;  ///< number of completed rounds k; metrics refer to x_hat^k
  double sim_time_s = 0.0;
  std::size_t participants = 0;
  double violation = 0.0;  ///< ||[F(x_hat^k)]^+||
  double objective = 0.0;  ///< f0(x_hat^k)
};

/// Per-round quantities used to estimate the constants of the convergence
/// bounds. Indexed by the round in which they were observed (x^k, lambda^k).
struct RoundDiagnostics {
  double max_weighted_subgradient = 0.0;  ///< max_i ||lambda_i g_i(x^k)||
  double lagrangian_x_norm = 0.0;         ///< ||g0 + sum_i lambda_i g_i||
  double lagrangian_lambda_norm = 0.0;    ///< ||F(x^k)||
};

struct SolverOptions {
  std::size_t rounds = 1;
  Vec x0;
  Vec lambda0;  ///< empty means all zeros
  double divergence_limit = 1e9;
  double start_time_s = 0.0;
  bool keep_iterates = false;
  bool keep_diagnostics = false;
};

struct SolverTrace {
  std::vector<RoundRecord> records;
  SolverState state;
  bool diverged = false;
  std::string diagnostic;
  std::vector<Vec> iterates;       ///< x^0 .. x^K when keep_iterates
  std::vector<Vec> dual_iterates;  ///< lambda^0 .. lambda^K when keep_iterates
  std::vector<RoundDiagnostics> diagnostics;

  Vec x_hat() const { return weighted_averages(state).x_hat; }
};

/// Distributed primal-dual subgradient loop with the uplink abstracted as an
/// aggregation channel. Round k:
///   1. every device evaluates f_i(x^k) and g_i(x^k),
///   2. lambda_i^{k+1} = P_D[lambda_i^k + a_k f_i(x^k)],
///   3. devices send s_i = lambda_i^k g_i(x^k) through the channel,
///   4. the server steps x^{k+1} = P_X[x^k - a_k (g0(x^k) + y~^k)].
/// Records are taken at the step-weighted average of x^0..x^k.
template <AggregationChannel Channel>
SolverTrace run_solver(const ProblemSpec& problem, Channel& channel, const HarmonicStep& steps,
                       const DualSetSchedule& dual_set, const SolverOptions& options, Rng& rng) {
  const std::size_t dim = problem.dimension;
  const std::size_t n = problem.num_constraints;
  require_same_size(options.x0.size(), dim, "run_solver(x0)");
  Vec lambda0 = options.lambda0.empty() ? Vec(n, 0.0) : options.lambda0;
  require_same_size(lambda0.size(), n, "run_solver(lambda0)");

  SolverTrace trace;
  trace.state = SolverState(problem.project(options.x0), std::move(lambda0));
  SolverState& st = trace.state;
  if (options.keep_iterates) {
    trace.iterates.push_back(st.x);
    trace.dual_iterates.push_back(st.lambda);
  }

  std::vector<Vec> messages(n);
  Vec f_values(n);
  Vec lambda_next(n);
  double sim_time = options.start_time_s;

  for (std::size_t k = 0; k < options.rounds; ++k) {
    const double a_k = steps(k);

    for (std::size_t i = 0; i < n; ++i) {
      f_values[i] = problem.constraint(i, st.x);
      if (st.lambda[i] != 0.0) {
        messages[i] = problem.constraint_subgradient(i, st.x);
        require_same_size(messages[i].size(), dim, "run_solver(g_i)");
        for (double& v : messages[i]) v *= st.lambda[i];
      } else {
        messages[i].assign(dim, 0.0);
      }
    }

    const double bound = dual_bound(dual_set, k + 1, st.z + a_k);
    for (std::size_t i = 0; i < n; ++i) {
      lambda_next[i] = dual_update(st.lambda[i], a_k, f_values[i], bound);
    }

    RoundAggregate agg = channel.transmit(std::span<const Vec>(messages), rng);
    require_same_size(agg.value.size(), dim, "run_solver(channel)");
    const Vec g0 = problem.objective_subgradient(st.x);

    if (options.keep_diagnostics) {
      RoundDiagnostics d;
      Vec lx = g0;
      for (const Vec& s : messages) {
        d.max_weighted_subgradient = std::max(d.max_weighted_subgradient, norm(s));
        axpy(1.0, s, lx);
      }
      d.lagrangian_x_norm = norm(lx);
      d.lagrangian_lambda_norm = norm(f_values);
      trace.diagnostics.push_back(d);
    }

    st.accumulate(a_k);
    Vec x_next = primal_update(st.x, a_k, g0, agg.value, problem.project);

    if (!all_finite(x_next) || norm(x_next) > options.divergence_limit) {
      trace.diverged = true;
      trace.diagnostic = "diverged at round " + std::to_string(k) +
                         ": ||x|| = " + std::to_string(norm(x_next));
      break;
    }

    st.x = std::move(x_next);
    st.lambda = lambda_next;
    st.round = k + 1;
    sim_time += agg.duration_s;
    if (options.keep_iterates) {
      trace.iterates.push_back(st.x);
      trace.dual_iterates.push_back(st.lambda);
    }

    const Vec x_hat = weighted_averages(st).x_hat;
    RoundRecord rec;
    rec.round = k + 1;
    rec.sim_time_s = sim_time;
    rec.participants = agg.participants;
    rec.violation = problem.violation(x_hat);
    rec.objective = problem.objective(x_hat);
    trace.records.push_back(rec);
  }
  return trace;
}

template <AggregationChannel Channel>
SolverTrace run_solver(const ProblemSpec& problem, Channel& channel, const HarmonicStep& steps,
                       const DualSetSchedule& dual_set, const SolverOptions& options,
                       std::uint64_t seed) {
  Rng rng(seed);
  return run_solver(problem, channel, steps, dual_set, options, rng);
}

}  // namespace dpd
