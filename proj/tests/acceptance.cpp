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
// Acceptance suite: one PASS/FAIL line per primary criterion, followed by the
// measured quantities. Exits 0 once every criterion has been evaluated; pass
// --strict to turn any FAIL into a non-zero exit status.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dpd/bounds/bounds.hpp"
#include "dpd/channel/aircomp.hpp"
#include "dpd/channel/models.hpp"
#include "dpd/channel/timing.hpp"
#include "dpd/core/solver.hpp"
#include "dpd/harness/config.hpp"
#include "dpd/harness/experiment.hpp"
#include "dpd/usecases/fdma.hpp"
#include "dpd/usecases/projection.hpp"
#include "dpd/usecases/smart_grid.hpp"
#include "oracles.hpp"

using namespace dpd;
using namespace dpd::harness;

namespace {

struct Verdict {
  explicit Verdict(std::string n) : name(std::move(n)) {}
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
  double seconds = 0.0;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ExperimentConfig case_b() {
  ExperimentConfig c = ExperimentConfig::defaults(UseCase::kFdma);
  c.runs = 100;
  c.seed = 1000;
  return c;
}

ExperimentConfig case_a() {
  ExperimentConfig c = ExperimentConfig::defaults(UseCase::kSmartGrid);
  c.runs = 100;
  c.seed = 2000;
  return c;
}

const double kRth = 2.85e6;

// Case B, beta = 1e4, a_k = 1/(1e5 + k), 100 runs: violation at round 60
// within 1% of R_th.
Verdict violation_convergence() {
  Verdict v{"constraint-violation convergence (case B, beta=1e4, round 60 <= 1% R_th)"};
  ExperimentConfig c = case_b();
  c.channel.beta = 1e4;
  c.solver.c1 = 1.0;
  c.solver.c2 = 1e5;
  c.solver.rounds = 60;
  const MonteCarloResult r = run_monte_carlo(c);
  const AggregateRow& row = r.aggregate.at(59);
  v.pass = row.violation_mean <= 0.01 * kRth && row.runs >= 100;
  v.details.push_back(fmt("mean violation at round 60 = %.6g bit/s (%.4g%% of R_th), runs used = %.0f",
                          row.violation_mean, 100.0 * row.violation_mean / kRth, static_cast<double>(row.runs)));
  v.details.push_back(fmt("mean participants at round 60 = %.3g of 10", row.participants_mean));
  return v;
}

// Converged sum rate within 5% of error-free for beta in {1e4, 1e8}; 1e10
// strictly below 1e8.
Verdict sum_rate() {
  Verdict v{"near-optimal sum rate (case B, beta 1e4/1e8 within 5% of error-free, 1e10 < 1e8)"};
  ExperimentConfig c = case_b();
  auto final_rate = [](const MonteCarloResult& r) { return -r.aggregate.back().objective_mean; };
  const double reference = final_rate(run_error_free_baseline(c));
  double rates[3];
  const double betas[3] = {1e4, 1e8, 1e10};
  for (int i = 0; i < 3; ++i) {
    c.channel.beta = betas[i];
    c.channel_mode = ChannelMode::kAirComp;
    rates[i] = final_rate(run_monte_carlo(c));
  }
  const bool near4 = std::abs(rates[0] - reference) <= 0.05 * reference;
  const bool near8 = std::abs(rates[1] - reference) <= 0.05 * reference;
  const bool order = rates[2] < rates[1];
  v.pass = near4 && near8 && order;
  v.details.push_back(fmt("error-free sum rate = %.6g bit/s", reference));
  for (int i = 0; i < 3; ++i) {
    v.details.push_back(fmt("beta=%.0e: sum rate = %.6g bit/s (%+.3f%% vs error-free)", betas[i], rates[i],
                            100.0 * (rates[i] - reference) / reference));
  }
  return v;
}

// Case A Stackelberg price: beta=1e6 within 2% of error-free, beta=1e8 not
// above error-free.
Verdict stackelberg_price() {
  Verdict v{"Stackelberg price (case A, beta=1e6 within 2% of error-free, beta=1e8 <= error-free)"};
  ExperimentConfig c = case_a();
  const auto reference = run_error_free_baseline(c).mean_final_price();
  c.channel.beta = 1e6;
  const auto p6 = run_monte_carlo(c).mean_final_price();
  c.channel.beta = 1e8;
  const auto p8 = run_monte_carlo(c).mean_final_price();
  if (!reference || !p6 || !p8) {
    v.details.push_back("no converged price available");
    return v;
  }
  v.pass = std::abs(*p6 - *reference) <= 0.02 * *reference && *p8 <= *reference;
  v.details.push_back(fmt("error-free mean price = %.6g", *reference));
  v.details.push_back(fmt("beta=1e6 mean price = %.6g (%+.3f%%)", *p6, 100.0 * (*p6 - *reference) / *reference));
  v.details.push_back(fmt("beta=1e8 mean price = %.6g (%+.3f%%)", *p8, 100.0 * (*p8 - *reference) / *reference));
  return v;
}

// Time to 1% violation: AirComp <= 0.1 x TDMA; AirComp round = 1.28e-4 s.
Verdict timing() {
  Verdict v{"timing (case B, AirComp time to 1% violation <= 0.1 x TDMA, round = 1.28e-4 s)"};
  ExperimentConfig c = case_b();
  c.solver.rounds = 400;
  c.runs = 50;
  const MonteCarloResult air = run_monte_carlo(c);
  const MonteCarloResult tdma = run_error_free_baseline(c);
  const double per_round = aircomp_round_duration(c.channel.L, c.channel.B);
  const bool exact_round = per_round == 1.28e-4 && air.aggregate.front().sim_time_s_mean == 1.28e-4;
  const auto t_air = time_to_violation(air.aggregate, 0.01 * kRth);
  const auto t_tdma = time_to_violation(tdma.aggregate, 0.01 * kRth);
  v.details.push_back(fmt("AirComp round duration = %.6g s", air.aggregate.front().sim_time_s_mean));
  v.details.push_back(fmt("TDMA mean round duration = %.6g s (ratio %.3g)",
                          tdma.aggregate.back().sim_time_s_mean / static_cast<double>(tdma.aggregate.size()),
                          tdma.aggregate.back().sim_time_s_mean / air.aggregate.back().sim_time_s_mean));
  v.details.push_back(t_air ? fmt("AirComp time to 1%% violation = %.6g s", *t_air)
                            : fmt("AirComp never settles at 1%% violation within %.0f rounds (final %.4g%% of R_th)",
                                  static_cast<double>(c.solver.rounds),
                                  100.0 * air.aggregate.back().violation_mean / kRth));
  v.details.push_back(t_tdma ? fmt("TDMA time to 1%% violation = %.6g s", *t_tdma)
                             : std::string("TDMA never settles at 1% violation"));
  v.pass = exact_round && t_air && t_tdma && *t_air <= 0.1 * *t_tdma;
  return v;
}

double max_iterate_gap(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) return INFINITY;
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, max_abs_diff(a[k], b[k]));
  return gap;
}

// sigma^2 = 0 and forced participation reproduce the centralised method.
Verdict noiseless_equivalence() {
  Verdict v{"noiseless equivalence (both use cases, 200 rounds, <= 1e-12)"};
  bool ok = true;
  for (UseCase u : {UseCase::kSmartGrid, UseCase::kFdma}) {
    ExperimentConfig c = ExperimentConfig::defaults(u);
    Rng inst_rng = make_stream(42, kInstanceStream);
    Rng start_rng = make_stream(42, kStartStream);
    const Instance inst = draw_instance(c, inst_rng);
    const ProblemSpec p = u == UseCase::kSmartGrid ? smart_grid::build_problem(inst.smart_grid)
                                                   : fdma::build_problem(inst.fdma);
    const Vec x0 = draw_start(c, inst, start_rng);
    AirCompChannel ch(inst.devices, 0.0, c.channel.P_max, c.channel.beta, 1e-4);
    ch.force_full_participation(true);
    SolverOptions opt;
    opt.rounds = 200;
    opt.x0 = x0;
    opt.keep_iterates = true;
    const auto trace = run_solver(p, ch, HarmonicStep(c.solver.c1, c.solver.c2),
                                  DualSetSchedule::practical(c.solver.zeta, c.solver.theta), opt, std::uint64_t{9});
    const auto ref = testing::centralized_primal_dual(p, x0, 200, c.solver.c1, c.solver.c2, c.solver.zeta,
                                                      c.solver.theta);
    const double gap = max_iterate_gap(trace.iterates, ref);
    ok = ok && gap <= 1e-12 && !trace.diverged;
    v.details.push_back(std::string(u == UseCase::kSmartGrid ? "smart grid" : "fdma") +
                        fmt(": max |x_solver - x_reference| over 200 rounds = %.3g", gap));
  }
  v.pass = ok;
  return v;
}

// Algorithm 2 vs the bisection projection on 1000 random instances.
Verdict projection() {
  Verdict v{"capacity-simplex projection (1000 instances, N <= 50, <= 1e-8, feasible to 1e-12)"};
  Rng rng(77);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> cap(0.1, 100.0);
  std::uniform_real_distribution<double> entry(-50.0, 50.0);
  double worst = 0.0;
  double worst_excess = 0.0;
  bool nonneg = true;
  for (int t = 0; t < 1000; ++t) {
    Vec u(static_cast<std::size_t>(size(rng)));
    for (double& x : u) x = entry(rng);
    const double c = cap(rng);
    const Vec got = project_capacity_simplex(u, c);
    const Vec want = testing::capped_simplex_by_bisection(u, c);
    worst = std::max(worst, max_abs_diff(got, want));
    double total = 0.0;
    for (double x : got) {
      nonneg = nonneg && x >= 0.0;
      total += x;
    }
    worst_excess = std::max(worst_excess, total - c);
  }
  v.pass = worst <= 1e-8 && worst_excess <= 1e-12 && nonneg;
  v.details.push_back(fmt("max deviation from oracle = %.3g, max capacity excess = %.3g", worst, worst_excess));
  return v;
}

// Empirical violation and gap against the bounds, N = 5, 500 runs.
Verdict bound_validity() {
  Verdict v{"bound validity (N=5 smart grid, 500 runs, violation bound and gap sandwich at 3 sigma)"};
  ExperimentConfig c = ExperimentConfig::defaults(UseCase::kSmartGrid);
  c.smart_grid.N = 5;
  c.smart_grid.C = 99.0 * 5.0 / 20.0;
  c.smart_grid.u0_max = 2.0 * c.smart_grid.C / 5.0;
  c.smart_grid.max_outer = 1;
  c.channel.L = 10;
  c.channel.beta = 1e6;
  c.solver.rounds = 500;
  c.runs = 500;
  c.seed = 3000;
  c.instance_seed = 2026;
  c.bounds = true;
  const MonteCarloResult r = run_monte_carlo(c);
  if (!r.bounds) {
    v.details.push_back("bounds unavailable");
    return v;
  }
  const BoundReport& b = *r.bounds;
  std::size_t bad_violation = 0, bad_upper = 0, bad_lower = 0;
  double worst_ratio = 0.0;
  for (std::size_t j = 0; j < b.rows.size(); ++j) {
    const double vs = 3.0 * b.violation_stderr[j];
    const double gs = 3.0 * b.gap_stderr[j];
    if (b.violation_mean[j] - vs > b.rows[j].violation_bound) ++bad_violation;
    if (b.gap_mean[j] - gs > b.rows[j].gap_upper) ++bad_upper;
    // the lower bound uses the sampled violation, so widen by its error too
    if (b.gap_mean[j] + gs < b.rows[j].gap_lower - b.zeta * vs) ++bad_lower;
    worst_ratio = std::max(worst_ratio, b.violation_mean[j] / b.rows[j].violation_bound);
  }
  v.pass = bad_violation == 0 && bad_upper == 0 && bad_lower == 0 && r.diverged == 0;
  v.details.push_back(fmt("constants: G=%.4g L=%.4g R=%.4g", b.constants.G, b.constants.L, b.constants.R));
  v.details.push_back(fmt("rounds violating: violation bound %.0f, upper gap %.0f, lower gap %.0f",
                          static_cast<double>(bad_violation), static_cast<double>(bad_upper),
                          static_cast<double>(bad_lower)));
  v.details.push_back(fmt("max empirical/bound violation ratio = %.3g; diverged runs = %.0f", worst_ratio,
                          static_cast<double>(r.diverged)));
  return v;
}

// Randomised invariant checks with fixed seeds.
Verdict invariants() {
  Verdict v{"invariant suites (participation, dual clamping, projections, subgradients, gradients)"};
  Rng rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool ok = true;
  auto check = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      v.details.push_back("failed: " + what);
    }
  };

  // participation monotone in beta
  bool mono = true;
  for (int t = 0; t < 10000; ++t) {
    const double s2 = std::pow(10.0, 4.0 * unit(rng) - 2.0);
    const double h = std::pow(10.0, -3.0 * unit(rng));
    const double b1 = std::pow(10.0, 10.0 * unit(rng));
    const double b2 = b1 * (1.0 + 10.0 * unit(rng));
    if (participates(s2, h, b1, 1.0) && !participates(s2, h, b2, 1.0)) mono = false;
  }
  check(mono, "participation monotone in beta");

  // dual clamping along AirComp runs of both use cases
  bool clamped = true;
  for (UseCase u : {UseCase::kSmartGrid, UseCase::kFdma}) {
    ExperimentConfig c = ExperimentConfig::defaults(u);
    Rng ir = make_stream(5, kInstanceStream);
    Rng sr = make_stream(5, kStartStream);
    const Instance inst = draw_instance(c, ir);
    const ProblemSpec p = u == UseCase::kSmartGrid ? smart_grid::build_problem(inst.smart_grid)
                                                   : fdma::build_problem(inst.fdma);
    AirCompChannel ch(inst.devices, dbm_to_watts(c.channel.sigma2_dbm), 1.0, c.channel.beta, 1e-4);
    SolverOptions opt;
    opt.rounds = 100;
    opt.x0 = draw_start(c, inst, sr);
    opt.keep_iterates = true;
    const HarmonicStep steps(c.solver.c1, c.solver.c2);
    const auto ds = DualSetSchedule::practical(c.solver.zeta, c.solver.theta);
    const auto t = run_solver(p, ch, steps, ds, opt, std::uint64_t{5});
    double z = 0.0;
    for (std::size_t k = 0; k < t.dual_iterates.size(); ++k) {
      const double edge = dual_bound(ds, k, z);
      for (double l : t.dual_iterates[k]) clamped = clamped && l >= 0.0 && l <= edge;
      clamped = clamped && max_abs_diff(p.project(t.iterates[k]), t.iterates[k]) <= 1e-12;
      if (k < t.dual_iterates.size() - 1) z += steps(k);
    }
  }
  check(clamped, "duals within [0, bound(k)] and iterates in X");

  // projections: idempotent and nonexpansive
  bool proj = true;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * 30);
    Vec a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = 20.0 * unit(rng) - 10.0;
      b[i] = 20.0 * unit(rng) - 10.0;
    }
    const double cap = 0.1 + 20.0 * unit(rng);
    const Vec pa = project_capacity_simplex(a, cap), pb = project_capacity_simplex(b, cap);
    proj = proj && max_abs_diff(project_capacity_simplex(pa, cap), pa) <= 1e-12;
    proj = proj && distance(pa, pb) <= distance(a, b) + 1e-12;
    const Vec sa = project_simplex(a), sb = project_simplex(b);
    proj = proj && max_abs_diff(project_simplex(sa), sa) <= 1e-12;
    proj = proj && distance(sa, sb) <= distance(a, b) + 1e-12;
  }
  check(proj, "projection idempotence and nonexpansiveness");

  // subgradient inequality and finite differences on both problems
  bool subgrad = true;
  bool fd = true;
  for (UseCase u : {UseCase::kSmartGrid, UseCase::kFdma}) {
    ExperimentConfig c = ExperimentConfig::defaults(u);
    if (u == UseCase::kFdma) {
      c.fdma.N = 3;
      c.fdma.K = 4;
    }
    Rng ir = make_stream(8, kInstanceStream);
    const Instance inst = draw_instance(c, ir);
    const ProblemSpec p = u == UseCase::kSmartGrid ? smart_grid::build_problem(inst.smart_grid)
                                                   : fdma::build_problem(inst.fdma);
    Rng sr = make_stream(8, kStartStream);
    for (int t = 0; t < 100; ++t) {
      const Vec x = p.project(draw_start(c, inst, sr));
      const Vec y = p.project(draw_start(c, inst, sr));
      for (std::size_t i = 0; i <= p.num_constraints; ++i) {
        const bool obj = i == p.num_constraints;
        auto f = [&](std::span<const double> z) { return obj ? p.objective(z) : p.constraint(i, z); };
        const Vec gy = obj ? p.objective_subgradient(y) : p.constraint_subgradient(i, y);
        Vec d(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) d[j] = x[j] - y[j];
        subgrad = subgrad && f(x) >= f(y) + dot(gy, d) - 1e-9 * std::max(1.0, std::abs(f(x)));
        if (t < 10) {
          const Vec num = testing::central_difference(f, x);
          const Vec gx = obj ? p.objective_subgradient(x) : p.constraint_subgradient(i, x);
          const double scale = std::max(norm(gx), 1e-12);
          Vec diff(gx.size());
          for (std::size_t j = 0; j < gx.size(); ++j) diff[j] = gx[j] - num[j];
          fd = fd && norm(diff) <= 1e-5 * scale;
        }
      }
    }
  }
  check(subgrad, "subgradient inequality on random pairs");
  check(fd, "finite-difference gradients (relative 1e-5)");
  v.pass = ok;
  if (ok) v.details.push_back("all randomised invariant checks passed");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) strict = strict || std::strcmp(argv[i], "--strict") == 0;

  const std::vector<std::function<Verdict()>> criteria = {
      violation_convergence, sum_rate, stackelberg_price, timing, noiseless_equivalence,
      projection, bound_validity, invariants};
  std::size_t failed = 0;
  for (const auto& run : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v = run();
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("[%s] %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.seconds);
    for (const std::string& d : v.details) std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return strict && failed > 0 ? 1 : 0;
}
