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
#include <random>
#include <stdexcept>
#include <vector>

#include "dpd/core/random.hpp"
#include "dpd/usecases/fdma.hpp"
#include "dpd/usecases/projection.hpp"

namespace dpd::fdma {

struct OracleOptions {
  std::size_t starts = 3;
  std::size_t outer_iterations = 60;
  std::size_t inner_iterations = 20000;
  double penalty = 20.0;
  double feasibility_tolerance = 1e-7;  ///< relative to R_th
  std::uint64_t seed = 7;
};

struct OracleResult {
  Vec x;  ///< (p, w) with p in power units of `params`
  double sum_rate_bps = 0.0;
  double max_shortfall_bps = 0.0;  ///< max_n (R_th - R_n)^+
  bool feasible = false;
};

namespace oracle_detail {

// Normalised instance: p as a fraction of the budget, rates in bit/s/Hz of
// one subband. e_{nk} = w log2(1 + c_{nk} q / w).
struct Scaled {
  std::size_t users, bands;
  Vec c;
  double threshold;
  Sharing sharing;
};

inline double spectral(double w, double q, double c) {
  return w > 0.0 ? w * std::log2(1.0 + c * q / w) : 0.0;
}

inline Vec user_spectral(const Scaled& s, const Vec& x) {
  const std::size_t nk = s.users * s.bands;
  Vec e(s.users, 0.0);
  for (std::size_t n = 0; n < s.users; ++n) {
    for (std::size_t k = 0; k < s.bands; ++k) {
      const std::size_t j = n * s.bands + k;
      e[n] += spectral(x[nk + j], x[j], s.c[j]);
    }
  }
  return e;
}

// Augmented Lagrangian of  min -sum e  s.t.  threshold - e_n <= 0.
inline double merit(const Scaled& s, const Vec& x, const Vec& mu, double rho) {
  const Vec e = user_spectral(s, x);
  double v = 0.0;
  for (std::size_t n = 0; n < s.users; ++n) {
    const double t = std::max(0.0, mu[n] + rho * (s.threshold - e[n]));
    v += -e[n] + (t * t - mu[n] * mu[n]) / (2.0 * rho);
  }
  return v;
}

inline Vec merit_gradient(const Scaled& s, const Vec& x, const Vec& mu, double rho) {
  const std::size_t nk = s.users * s.bands;
  const Vec e = user_spectral(s, x);
  Vec g(2 * nk, 0.0);
  for (std::size_t n = 0; n < s.users; ++n) {
    const double weight = -1.0 - std::max(0.0, mu[n] + rho * (s.threshold - e[n]));
    for (std::size_t k = 0; k < s.bands; ++k) {
      const std::size_t j = n * s.bands + k;
      const double q = x[j];
      const double w = std::max(x[nk + j], 1e-12);
      const double t = s.c[j] * q / w;
      g[j] = weight * s.c[j] * w / ((w + s.c[j] * q) * std::numbers::ln2);
      g[nk + j] = weight * (std::log2(1.0 + t) - t / ((1.0 + t) * std::numbers::ln2));
    }
  }
  return g;
}

inline Vec project_scaled(const Scaled& s, const Vec& x) {
  const std::size_t nk = s.users * s.bands;
  Vec out(2 * nk);
  const Vec q = project_capacity_simplex(std::span<const double>(x).first(nk), 1.0);
  std::copy(q.begin(), q.end(), out.begin());
  if (s.sharing == Sharing::kPerUser) {
    for (std::size_t n = 0; n < s.users; ++n) {
      const Vec w = project_simplex(std::span<const double>(x).subspan(nk + n * s.bands, s.bands));
      std::copy(w.begin(), w.end(), out.begin() + static_cast<std::ptrdiff_t>(nk + n * s.bands));
    }
  } else {
    Vec col(s.users);
    for (std::size_t k = 0; k < s.bands; ++k) {
      for (std::size_t n = 0; n < s.users; ++n) col[n] = x[nk + n * s.bands + k];
      const Vec w = project_simplex(col);
      for (std::size_t n = 0; n < s.users; ++n) out[nk + n * s.bands + k] = w[n];
    }
  }
  return out;
}

// Projected gradient with Armijo backtracking on the merit function.
inline Vec minimise(const Scaled& s, Vec x, const Vec& mu, double rho, std::size_t iterations) {
  double step = 1.0;
  double f = merit(s, x, mu, rho);
  for (std::size_t it = 0; it < iterations; ++it) {
    const Vec g = merit_gradient(s, x, mu, rho);
    step = std::min(step * 2.0, 1e3);
    Vec trial;
    double ft = 0.0;
    double moved2 = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      Vec y = x;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= step * g[i];
      trial = project_scaled(s, y);
      ft = merit(s, trial, mu, rho);
      double decrease = 0.0;
      moved2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = trial[i] - x[i];
        decrease += g[i] * d;
        moved2 += d * d;
      }
      if (ft <= f + 1e-4 * decrease) break;
      step *= 0.5;
    }
    x = std::move(trial);
    f = ft;
    if (moved2 < 1e-26) break;
  }
  return x;
}

}  // namespace oracle_detail

/// Reference solution of the rate-constrained sum-rate problem for small
/// instances (validation only): augmented-Lagrangian outer loop, projected
/// gradient inner loop, best feasible point over several starts.
inline OracleResult oracle(const Params& prm, const OracleOptions& opt = {}) {
  prm.validate();
  using namespace oracle_detail;
  const std::size_t nk = prm.block();
  const double sub = prm.bandwidth_hz / static_cast<double>(prm.bands);
  Scaled s{prm.users, prm.bands, Vec(nk), prm.rate_threshold_bps / sub, prm.sharing};
  for (std::size_t j = 0; j < nk; ++j) {
    s.c[j] = prm.power_budget_w * prm.gain[j] * prm.gain[j] / (prm.noise_psd * sub);
  }

  Rng rng(opt.seed);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  OracleResult best;
  bool have = false;
  for (std::size_t start = 0; start < std::max<std::size_t>(opt.starts, 1); ++start) {
    Vec x(2 * nk);
    const double w0 = prm.sharing == Sharing::kPerBand ? 1.0 / static_cast<double>(prm.users)
                                                      : 1.0 / static_cast<double>(prm.bands);
    for (std::size_t j = 0; j < nk; ++j) {
      x[j] = (start == 0 ? 1.0 : jitter(rng)) / static_cast<double>(nk);
      x[nk + j] = w0 * (start == 0 ? 1.0 : jitter(rng));
    }
    x = project_scaled(s, x);
    Vec mu(prm.users, 0.0);
    for (std::size_t outer = 0; outer < opt.outer_iterations; ++outer) {
      x = minimise(s, x, mu, opt.penalty, opt.inner_iterations);
      const Vec e = user_spectral(s, x);
      for (std::size_t n = 0; n < prm.users; ++n) mu[n] = std::max(0.0, mu[n] + opt.penalty * (s.threshold - e[n]));
    }

    OracleResult r;
    r.x = x;
    for (std::size_t j = 0; j < nk; ++j) r.x[j] = x[j] * prm.power_budget_w / prm.power_unit;
    const Vec e = user_spectral(s, x);
    for (std::size_t n = 0; n < prm.users; ++n) {
      r.sum_rate_bps += e[n] * sub;
      r.max_shortfall_bps = std::max(r.max_shortfall_bps, (s.threshold - e[n]) * sub);
    }
    r.feasible = r.max_shortfall_bps <= opt.feasibility_tolerance * prm.rate_threshold_bps;
    const bool better = !have || (r.feasible && !best.feasible) ||
                        (r.feasible == best.feasible && (r.feasible ? r.sum_rate_bps > best.sum_rate_bps
                                                                    : r.max_shortfall_bps < best.max_shortfall_bps));
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace dpd::fdma
