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
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dpd/bounds/bounds.hpp"
#include "dpd/channel/aircomp.hpp"
#include "dpd/channel/fading.hpp"
#include "dpd/channel/models.hpp"
#include "dpd/channel/timing.hpp"
#include "dpd/core/problem.hpp"
#include "dpd/core/random.hpp"
#include "dpd/core/solver.hpp"
#include "dpd/harness/config.hpp"
#include "dpd/usecases/fdma.hpp"
#include "dpd/usecases/smart_grid.hpp"

namespace dpd::harness {

/// Independent random streams of one run.
enum Stream : std::uint64_t { kInstanceStream = 1, kStartStream = 2, kChannelStream = 3, kProbeStream = 4 };

/// Devices and use-case data of one Monte Carlo run.
struct Instance {
  std::vector<FadingParams> devices;
  smart_grid::Params smart_grid;
  fdma::Params fdma;
};

inline FadingParams base_fading(const ChannelConfig& ch) {
  FadingParams f;
  f.t0 = db_to_linear(ch.T0_db);
  f.exponent = ch.a;
  f.epsilon = ch.epsilon;
  return f;
}

inline std::size_t device_count(const ExperimentConfig& cfg) {
  return cfg.use_case == UseCase::kSmartGrid ? cfg.smart_grid.N : cfg.fdma.N;
}

/// Draws distances (and PEV parameters, or FDMA band gains) for one run.
inline Instance draw_instance(const ExperimentConfig& cfg, Rng& rng) {
  const std::size_t n = device_count(cfg);
  Instance inst;
  std::uniform_real_distribution<double> dist(cfg.channel.d_over_d0_min, cfg.channel.d_over_d0_max);
  inst.devices.assign(n, base_fading(cfg.channel));
  for (FadingParams& d : inst.devices) d.d_over_d0 = dist(rng);

  if (cfg.use_case == UseCase::kSmartGrid) {
    const SmartGridConfig& sg = cfg.smart_grid;
    std::uniform_real_distribution<double> b(sg.b_min, sg.b_max);
    std::uniform_real_distribution<double> s(sg.s_min, sg.s_max);
    for (std::size_t i = 0; i < n; ++i) {
      inst.smart_grid.b.push_back(b(rng));
      inst.smart_grid.s.push_back(s(rng));
    }
    inst.smart_grid.capacity = sg.C;
    inst.smart_grid.price = sg.price0;
  } else {
    const FdmaConfig& fc = cfg.fdma;
    fdma::Params& p = inst.fdma;
    p.users = fc.N;
    p.bands = fc.K;
    p.bandwidth_hz = cfg.channel.B;
    p.noise_psd = dbm_to_watts(fc.N0_dbm_hz);
    p.power_budget_w = fc.P;
    p.rate_threshold_bps = fc.R_th;
    p.rate_unit = fc.rate_unit;
    p.power_unit = fc.power_unit;
    p.sharing = fc.sharing;
    p.gain.resize(p.block());
    // one static gain per (user, band) for the allocation problem
    for (std::size_t u = 0; u < p.users; ++u) {
      for (std::size_t k = 0; k < p.bands; ++k) p.gain[p.idx(u, k)] = sample_fading(inst.devices[u], rng);
    }
  }
  return inst;
}

/// Random start: demands uniform in [0, u0_max] with tight epigraph
/// variables, or the uniform allocation perturbed by init_spread.
inline Vec draw_start(const ExperimentConfig& cfg, const Instance& inst, Rng& rng) {
  if (cfg.use_case == UseCase::kSmartGrid) {
    const smart_grid::Params& p = inst.smart_grid;
    const std::size_t n = p.size();
    std::uniform_real_distribution<double> u(0.0, cfg.smart_grid.u0_max);
    Vec x(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      x[n + i] = smart_grid::pev_utility(p.b[i], p.s[i], p.price, x[i]);
    }
    return x;
  }
  Vec x = fdma::uniform_allocation(inst.fdma);
  std::uniform_real_distribution<double> jitter(1.0 - cfg.fdma.init_spread, 1.0 + cfg.fdma.init_spread);
  for (double& v : x) v *= jitter(rng);
  return x;
}

/// Noise power used by the digital baseline's SNR: N0 B for FDMA, the
/// receiver noise power otherwise.
inline double tdma_noise_power(const ExperimentConfig& cfg) {
  if (cfg.use_case == UseCase::kFdma) return dbm_to_watts(cfg.fdma.N0_dbm_hz) * cfg.channel.B;
  return dbm_to_watts(cfg.channel.sigma2_dbm);
}

/// Scale from optimiser units to reported units (bit/s for FDMA).
inline double report_scale(const ExperimentConfig& cfg) {
  return cfg.use_case == UseCase::kFdma ? cfg.fdma.rate_unit : 1.0;
}

struct RunRow {
  std::size_t round = 0;
  double sim_time_s = 0.0;
  std::size_t participants = 0;
  double violation = 0.0;
  double objective = 0.0;
  std::optional<double> price;
  std::optional<double> sum_rate;
};

/// Instrumented solve kept for bound evaluation.
struct BoundSample {
  SolverTrace trace;
  Vec x_star;
  double f_star = 0.0;
};

struct RunResult {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  std::vector<RunRow> rows;
  bool diverged = false;
  std::string diagnostic;
  std::vector<std::size_t> excluded;  ///< bottleneck devices dropped up front
  // smart grid only
  std::optional<double> final_price;
  bool price_converged = false;
  std::size_t outer_iterations = 0;
  std::optional<BoundSample> bound_sample;
};

namespace detail {

struct StageOutput {
  SolverTrace trace;
  std::vector<std::size_t> excluded;
};

// One solve of the configured problem on the configured uplink.
inline StageOutput solve_stage(const ExperimentConfig& cfg, const ProblemSpec& full, const Instance& inst,
                               const Vec& x0, double start_time, Rng& channel_rng, Rng& probe_rng,
                               bool instrument) {
  StageOutput out;
  const std::size_t n = full.num_constraints;
  const double sigma2 = dbm_to_watts(cfg.channel.sigma2_dbm);

  // Bottleneck devices: participation probability of their first message.
  std::vector<std::size_t> kept;
  if (cfg.channel_mode == ChannelMode::kAirComp && cfg.channel.bottleneck_threshold > 0.0) {
    Vec s_norm2(n, 0.0);  // lambda^0 = 0, so every first message is zero
    out.excluded = bottleneck_devices(s_norm2, cfg.channel.beta, cfg.channel.P_max, inst.devices,
                                      cfg.channel.bottleneck_threshold, cfg.channel.participation_samples,
                                      probe_rng);
  }
  std::vector<FadingParams> devices;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(out.excluded.begin(), out.excluded.end(), i) == out.excluded.end()) {
      kept.push_back(i);
      devices.push_back(inst.devices[i]);
    }
  }
  const ProblemSpec problem = out.excluded.empty() ? full : restrict_constraints(full, kept);

  SolverOptions opt;
  opt.rounds = cfg.solver.rounds;
  opt.x0 = x0;
  opt.divergence_limit = cfg.solver.divergence_limit;
  opt.start_time_s = start_time;
  opt.keep_iterates = instrument;
  opt.keep_diagnostics = instrument;
  const HarmonicStep steps(cfg.solver.c1, cfg.solver.c2);
  const DualSetSchedule dual = DualSetSchedule::practical(cfg.solver.zeta, cfg.solver.theta);

  if (cfg.channel_mode == ChannelMode::kAirComp) {
    AirCompChannel ch(devices, sigma2, cfg.channel.P_max, cfg.channel.beta,
                      aircomp_round_duration(cfg.channel.L, cfg.channel.B));
    out.trace = run_solver(problem, ch, steps, dual, opt, channel_rng);
  } else {
    TdmaChannel ch(devices, cfg.channel.L, cfg.channel.P_max, tdma_noise_power(cfg), cfg.channel.B);
    out.trace = run_solver(problem, ch, steps, dual, opt, channel_rng);
  }
  return out;
}

}  // namespace detail

/// Executes run `run_index` of the experiment: seeds base_seed + run_index,
/// instance from instance_seed when set. `instrument` keeps the first solve
/// (iterates, diagnostics, oracle optimum) for bound evaluation.
inline RunResult run_single(const ExperimentConfig& cfg, std::size_t run_index, bool instrument = false) {
  RunResult res;
  res.run_id = run_index;
  res.seed = cfg.seed + run_index;
  Rng instance_rng = make_stream(cfg.instance_seed.value_or(res.seed), kInstanceStream);
  Rng start_rng = make_stream(res.seed, kStartStream);
  Rng channel_rng = make_stream(res.seed, kChannelStream);
  Rng probe_rng = make_stream(res.seed, kProbeStream);
  const Instance inst = draw_instance(cfg, instance_rng);
  const double scale = report_scale(cfg);

  auto append = [&](const SolverTrace& trace, std::size_t round_offset, std::optional<double> price) {
    for (const RoundRecord& r : trace.records) {
      RunRow row;
      row.round = round_offset + r.round;
      row.sim_time_s = r.sim_time_s;
      row.participants = r.participants;
      row.violation = r.violation * scale;
      row.objective = r.objective * scale;
      row.price = price;
      if (cfg.use_case == UseCase::kFdma) row.sum_rate = -row.objective;
      res.rows.push_back(row);
    }
  };

  if (cfg.use_case == UseCase::kFdma) {
    const ProblemSpec problem = fdma::build_problem(inst.fdma);
    const Vec x0 = draw_start(cfg, inst, start_rng);
    detail::StageOutput stage = detail::solve_stage(cfg, problem, inst, x0, 0.0, channel_rng, probe_rng, false);
    res.excluded = stage.excluded;
    append(stage.trace, 0, std::nullopt);
    res.diverged = stage.trace.diverged;
    res.diagnostic = stage.trace.diagnostic;
    return res;
  }

  struct Diverged {};
  std::size_t round_offset = 0;
  double clock = 0.0;
  auto solve_demands = [&](const smart_grid::Params& params) -> Vec {
    Instance at_price = inst;
    at_price.smart_grid = params;
    const ProblemSpec problem = smart_grid::build_problem(params);
    const Vec x0 = draw_start(cfg, at_price, start_rng);
    const bool first = round_offset == 0;
    detail::StageOutput stage =
        detail::solve_stage(cfg, problem, at_price, x0, clock, channel_rng, probe_rng, instrument && first);
    if (first) res.excluded = stage.excluded;
    append(stage.trace, round_offset, params.price);
    round_offset += stage.trace.records.size();
    if (!stage.trace.records.empty()) clock = stage.trace.records.back().sim_time_s;
    if (stage.trace.diverged) {
      res.diagnostic = stage.trace.diagnostic;
      throw Diverged{};
    }
    if (instrument && first) {
      BoundSample b;
      b.x_star = smart_grid::oracle_point(params);
      b.f_star = -smart_grid::oracle(params).objective;
      b.trace = std::move(stage.trace);
      res.bound_sample = std::move(b);
      const Vec x_hat = res.bound_sample->trace.x_hat();
      return Vec(x_hat.begin(), x_hat.begin() + static_cast<std::ptrdiff_t>(params.size()));
    }
    const Vec x_hat = stage.trace.x_hat();
    return Vec(x_hat.begin(), x_hat.begin() + static_cast<std::ptrdiff_t>(params.size()));
  };

  smart_grid::StackelbergOptions sopt;
  sopt.relative_tolerance = cfg.smart_grid.price_tolerance;
  sopt.max_outer_iterations = cfg.smart_grid.max_outer;
  sopt.rule = cfg.smart_grid.price_rule;
  try {
    const smart_grid::StackelbergOutcome out = smart_grid::stackelberg_loop(inst.smart_grid, solve_demands, sopt);
    res.final_price = out.final_price;
    res.price_converged = out.converged;
    res.outer_iterations = out.steps.size();
  } catch (const Diverged&) {
    res.diverged = true;
  }
  return res;
}

struct AggregateRow {
  std::size_t round = 0;
  double sim_time_s_mean = 0.0;
  double violation_mean = 0.0;
  double violation_stderr = 0.0;
  double objective_mean = 0.0;
  double objective_stderr = 0.0;
  double participants_mean = 0.0;
  std::size_t runs = 0;  ///< runs contributing to this round
};

struct BoundReport {
  EstimatedConstants constants;
  double zeta = 0.0;
  std::vector<BoundRow> rows;
  Vec violation_mean, violation_stderr;
  Vec gap_mean, gap_stderr;
};

struct MonteCarloResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  std::vector<AggregateRow> aggregate;
  std::size_t diverged = 0;
  std::optional<BoundReport> bounds;

  /// Mean final Stackelberg price over non-diverged runs.
  std::optional<double> mean_final_price() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const RunResult& r : runs) {
      if (!r.diverged && r.final_price) {
        sum += *r.final_price;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

namespace detail {

struct MeanErr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanErr mean_stderr(const Vec& v) {
  MeanErr m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

}  // namespace detail

/// Per-round mean and standard error over the non-diverged runs that reach
/// each round.
inline std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs) {
  std::size_t longest = 0;
  for (const RunResult& r : runs) {
    if (!r.diverged) longest = std::max(longest, r.rows.size());
  }
  std::vector<AggregateRow> out;
  out.reserve(longest);
  for (std::size_t j = 0; j < longest; ++j) {
    Vec t, v, o, p;
    for (const RunResult& r : runs) {
      if (r.diverged || j >= r.rows.size()) continue;
      t.push_back(r.rows[j].sim_time_s);
      v.push_back(r.rows[j].violation);
      o.push_back(r.rows[j].objective);
      p.push_back(static_cast<double>(r.rows[j].participants));
    }
    AggregateRow row;
    row.round = j + 1;
    row.runs = v.size();
    row.sim_time_s_mean = detail::mean_stderr(t).mean;
    const auto vm = detail::mean_stderr(v);
    const auto om = detail::mean_stderr(o);
    row.violation_mean = vm.mean;
    row.violation_stderr = vm.stderr_;
    row.objective_mean = om.mean;
    row.objective_stderr = om.stderr_;
    row.participants_mean = detail::mean_stderr(p).mean;
    out.push_back(row);
  }
  return out;
}

/// Bound evaluation over the instrumented first solves of all non-diverged
/// runs. zeta = N follows from the Slater point (u*, U(u*) - 1).
inline std::optional<BoundReport> evaluate_run_bounds(const ExperimentConfig& cfg,
                                                      const std::vector<RunResult>& runs) {
  std::vector<const RunResult*> used;
  for (const RunResult& r : runs) {
    if (!r.diverged && r.bound_sample) used.push_back(&r);
  }
  if (used.empty()) return std::nullopt;

  BoundReport rep;
  double x0_sum = 0.0;
  for (const RunResult* r : used) {
    const SolverTrace& t = r->bound_sample->trace;
    const auto c = estimate_constants(std::span<const SolverTrace>(&t, 1), r->bound_sample->x_star);
    if (!c) return std::nullopt;
    rep.constants.G = std::max(rep.constants.G, c->G);
    rep.constants.L = std::max(rep.constants.L, c->L);
    rep.constants.R = std::max(rep.constants.R, c->R);
    x0_sum += c->x0_gap2;
  }
  rep.constants.x0_gap2 = x0_sum / static_cast<double>(used.size());

  const std::size_t n = cfg.smart_grid.N;
  rep.zeta = static_cast<double>(n);
  const std::size_t rounds = cfg.solver.rounds;
  BoundInputs in;
  in.G = rep.constants.G;
  in.L = rep.constants.L;
  in.R = rep.constants.R;
  in.x0_gap2 = rep.constants.x0_gap2;
  in.zeta = rep.zeta;
  in.N = static_cast<double>(n);
  const bool aircomp = cfg.channel_mode == ChannelMode::kAirComp;
  in.beta = aircomp ? cfg.channel.beta : 1.0;
  in.sigma2 = aircomp ? dbm_to_watts(cfg.channel.sigma2_dbm) : 0.0;
  const HarmonicStep steps(cfg.solver.c1, cfg.solver.c2);
  for (std::size_t j = 0; j < rounds; ++j) {
    in.steps.push_back(steps(j));
    Vec parts, viol, gap;
    for (const RunResult* r : used) {
      const RoundRecord& rec = r->bound_sample->trace.records.at(j);
      parts.push_back(static_cast<double>(rec.participants));
      viol.push_back(rec.violation);
      gap.push_back(rec.objective - r->bound_sample->f_star);
    }
    in.abar.push_back(detail::mean_stderr(parts).mean);
    const auto vm = detail::mean_stderr(viol);
    const auto gm = detail::mean_stderr(gap);
    rep.violation_mean.push_back(vm.mean);
    rep.violation_stderr.push_back(vm.stderr_);
    rep.gap_mean.push_back(gm.mean);
    rep.gap_stderr.push_back(gm.stderr_);
  }
  rep.rows = evaluate_bounds(in, rep.violation_mean);
  return rep;
}

/// All runs of one configuration, aggregated. Deterministic given the config.
inline MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
  validate(cfg);
  MonteCarloResult res;
  res.config = cfg;
  res.runs.reserve(cfg.runs);
  for (std::size_t i = 0; i < cfg.runs; ++i) {
    res.runs.push_back(run_single(cfg, i, cfg.bounds));
    if (res.runs.back().diverged) ++res.diverged;
  }
  res.aggregate = aggregate_runs(res.runs);
  if (cfg.bounds) res.bounds = evaluate_run_bounds(cfg, res.runs);
  return res;
}

/// Same experiment on the digital baseline: every device decoded exactly,
/// no receiver noise, TDMA airtime per round.
inline MonteCarloResult run_error_free_baseline(ExperimentConfig cfg) {
  cfg.channel_mode = ChannelMode::kErrorFree;
  return run_monte_carlo(cfg);
}

/// First round at which the aggregate violation drops to `threshold` and
/// stays there; the simulated time of that round.
inline std::optional<double> time_to_violation(const std::vector<AggregateRow>& agg, double threshold) {
  std::optional<double> t;
  for (const AggregateRow& r : agg) {
    if (r.violation_mean <= threshold) {
      if (!t) t = r.sim_time_s_mean;
    } else {
      t.reset();
    }
  }
  return t;
}

}  // namespace dpd::harness
