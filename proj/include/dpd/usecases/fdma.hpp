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
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpd/core/problem.hpp"
#include "dpd/usecases/projection.hpp"

namespace dpd::fdma {

/// Which bandwidth fractions must sum to one.
enum class Sharing {
  kPerBand,  ///< sum_n w_{k,n} = 1 for every band k
  kPerUser,  ///< sum_k w_{k,n} = 1 for every user n
};

/// Joint power / bandwidth allocation instance.
///
/// Primal vectors pack x = (p, w), each block N*K long and indexed
/// [n * K + k]. Rates inside the problem are divided by `rate_unit` so the
/// optimiser works in e.g. kbit/s instead of bit/s.
struct Params {
  std::size_t users = 10;  ///< N
  std::size_t bands = 64;  ///< K
  double bandwidth_hz = 1e6;
  double noise_psd = 3.981071705534972e-21;  ///< N0 in W/Hz (-174 dBm/Hz)
  double power_budget_w = 1.0;
  double rate_threshold_bps = 2.85e6;
  Vec gain;  ///< |h_{n,k}|, N*K entries
  double rate_unit = 1e3;
  double power_unit = 1e-3;  ///< watts per unit of the p block (mW by default)
  Sharing sharing = Sharing::kPerBand;

  std::size_t block() const { return users * bands; }
  std::size_t idx(std::size_t n, std::size_t k) const { return n * bands + k; }

  void validate() const {
    if (users == 0 || bands == 0) throw std::invalid_argument("fdma: N and K must be positive");
    if (!(bandwidth_hz > 0.0) || !(noise_psd > 0.0) || !(power_budget_w > 0.0) ||
        !(rate_threshold_bps > 0.0) || !(rate_unit > 0.0) || !(power_unit > 0.0)) {
      throw std::invalid_argument("fdma: B, N0, P, R_th and rate unit must be positive");
    }
    if (gain.size() != block()) throw std::invalid_argument("fdma: gain must have N*K entries");
    for (double g : gain) if (!(g > 0.0)) throw std::invalid_argument("fdma: channel gains must be positive");
  }
};

/// Floor applied to w inside gradient evaluation.
inline constexpr double kBandwidthFloor = 1e-9;

/// Shannon rate of one (user, band) pair in bit/s:
/// (w B / K) log2(1 + p h^2 / (w N0 B / K)). Zero when w = 0 (continuous
/// extension); a (w = 0, p > 0) input is outside the feasible set.
inline double fdma_rate(double w, double p, double h, double bandwidth_hz, std::size_t bands,
                        double noise_psd) {
  if (w < 0.0 || p < 0.0) throw std::invalid_argument("fdma_rate: negative w or p");
  if (w == 0.0) return 0.0;
  const double sub = bandwidth_hz / static_cast<double>(bands);
  return w * sub * std::log2(1.0 + p * h * h / (w * noise_psd * sub));
}

/// R_n in bit/s at x.
inline double user_rate(const Params& prm, std::span<const double> x, std::size_t n) {
  const std::size_t nk = prm.block();
  double r = 0.0;
  for (std::size_t k = 0; k < prm.bands; ++k) {
    const std::size_t j = prm.idx(n, k);
    r += fdma_rate(std::max(x[nk + j], 0.0), std::max(x[j], 0.0) * prm.power_unit, prm.gain[j], prm.bandwidth_hz,
                   prm.bands, prm.noise_psd);
  }
  return r;
}

inline double sum_rate(const Params& prm, std::span<const double> x) {
  double r = 0.0;
  for (std::size_t n = 0; n < prm.users; ++n) r += user_rate(prm, x, n);
  return r;
}

/// scale * d R_n / d(p, w), R_n in bit/s and p in power units, added into
/// the slots of user n.
inline void add_user_rate_gradient(const Params& prm, std::span<const double> x, std::size_t n,
                                   double scale, std::span<double> out) {
  const std::size_t nk = prm.block();
  const double sub = prm.bandwidth_hz / static_cast<double>(prm.bands);
  for (std::size_t k = 0; k < prm.bands; ++k) {
    const std::size_t j = prm.idx(n, k);
    const double p = std::max(x[j], 0.0);
    const double w = std::max(x[nk + j], kBandwidthFloor);
    // SNR per power unit over the full subband
    const double c = prm.power_unit * prm.gain[j] * prm.gain[j] / (prm.noise_psd * sub);
    const double t = c * p / w;
    out[j] += scale * sub * c * w / ((w + c * p) * std::numbers::ln2);
    out[nk + j] += scale * sub * (std::log2(1.0 + t) - t / ((1.0 + t) * std::numbers::ln2));
  }
}

/// Projection onto X = { p >= 0, sum p <= P, w >= 0, bandwidth sums = 1 }.
/// The p block and the w block are constrained separately, so projecting each
/// block on its own is exact.
inline Vec project(const Params& prm, std::span<const double> x) {
  const std::size_t nk = prm.block();
  Vec out(2 * nk);
  const Vec p = project_capacity_simplex(x.first(nk), prm.power_budget_w / prm.power_unit);
  std::copy(p.begin(), p.end(), out.begin());
  if (prm.sharing == Sharing::kPerUser) {
    for (std::size_t n = 0; n < prm.users; ++n) {
      const Vec w = project_simplex(x.subspan(nk + prm.idx(n, 0), prm.bands));
      std::copy(w.begin(), w.end(), out.begin() + static_cast<std::ptrdiff_t>(nk + prm.idx(n, 0)));
    }
  } else {
    Vec column(prm.users);
    for (std::size_t k = 0; k < prm.bands; ++k) {
      for (std::size_t n = 0; n < prm.users; ++n) column[n] = x[nk + prm.idx(n, k)];
      const Vec w = project_simplex(column);
      for (std::size_t n = 0; n < prm.users; ++n) out[nk + prm.idx(n, k)] = w[n];
    }
  }
  return out;
}

/// Sum-rate maximisation with per-user rate floors, as a minimisation:
/// f0 = -sum_n R_n / unit, f_n = (R_th - R_n) / unit.
inline ProblemSpec build_problem(const Params& params) {
  params.validate();
  const std::size_t nk = params.block();
  ProblemSpec p;
  p.dimension = 2 * nk;
  p.num_constraints = params.users;
  p.objective = [params](std::span<const double> x) { return -sum_rate(params, x) / params.rate_unit; };
  p.objective_subgradient = [params, nk](std::span<const double> x) {
    Vec g(2 * nk, 0.0);
    for (std::size_t n = 0; n < params.users; ++n) add_user_rate_gradient(params, x, n, -1.0 / params.rate_unit, g);
    return g;
  };
  p.constraint = [params](std::size_t n, std::span<const double> x) {
    return (params.rate_threshold_bps - user_rate(params, x, n)) / params.rate_unit;
  };
  p.constraint_subgradient = [params, nk](std::size_t n, std::span<const double> x) {
    Vec g(2 * nk, 0.0);
    add_user_rate_gradient(params, x, n, -1.0 / params.rate_unit, g);
    return g;
  };
  p.project = [params](std::span<const double> x) { return project(params, x); };
  return p;
}

/// Uniform allocation: p = P / (N K) (in power units), and w spread evenly
/// under the sharing rule.
inline Vec uniform_allocation(const Params& prm) {
  const std::size_t nk = prm.block();
  Vec x(2 * nk);
  const double w = prm.sharing == Sharing::kPerBand ? 1.0 / static_cast<double>(prm.users)
                                                    : 1.0 / static_cast<double>(prm.bands);
  for (std::size_t j = 0; j < nk; ++j) {
    x[j] = prm.power_budget_w / prm.power_unit / static_cast<double>(nk);
    x[nk + j] = w;
  }
  return x;
}

}  // namespace dpd::fdma
