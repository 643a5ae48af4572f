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

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpd/channel/fading.hpp"
#include "dpd/core/vector_ops.hpp"

namespace dpd {

/// Channel-inversion precoding for one device. Returns w = s / (sqrt(beta) h)
/// when ||s / h||^2 <= beta * P_max, otherwise nothing (the device stays
/// silent this round).
inline std::optional<Vec> transmit_signal(std::span<const double> s, double h, double beta,
                                          double p_max) {
  if (!(h > 0.0)) return std::nullopt;
  if (!(norm2(s) / (h * h) <= beta * p_max)) return std::nullopt;
  const double scale = 1.0 / (std::sqrt(beta) * h);
  Vec w(s.begin(), s.end());
  for (double& v : w) v *= scale;
  return w;
}

/// Participation test |h|^2 >= ||s||^2 / (beta P_max).
inline bool participates(double s_norm2, double h, double beta, double p_max) {
  return h * h >= s_norm2 / (beta * p_max);
}

/// Post-scaled receive signal: sum of participating messages plus
/// sqrt(beta) times AWGN of per-component variance sigma2.
inline Vec aggregate(std::span<const Vec> signals, std::size_t dimension, double beta,
                     double sigma2, Rng& rng) {
  Vec y(dimension, 0.0);
  for (const Vec& s : signals) axpy(1.0, s, y);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(beta * sigma2);
  for (double& v : y) v += scale * normal(rng);
  return y;
}

/// Monte Carlo estimate of Pr{|h|^2 >= s_norm2 / (beta P_max)}.
inline double participation_probability(double s_norm2, double beta, double p_max,
                                        const FadingParams& fading, std::size_t samples,
                                        Rng& rng) {
  if (samples == 0) throw std::invalid_argument("participation_probability: samples == 0");
  const double threshold = s_norm2 / (beta * p_max);
  if (threshold <= 0.0) return 1.0;
  if (!std::isfinite(threshold)) return 0.0;
  std::size_t hits = 0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double h = sample_fading(fading, rng);
    if (h * h >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// Mean of the Poisson-binomial participant count.
inline double expected_participants(std::span<const double> gammas) {
  double sum = 0.0;
  for (double g : gammas) {
    if (g < 0.0 || g > 1.0) throw std::invalid_argument("expected_participants: gamma outside [0,1]");
    sum += g;
  }
  return sum;
}

/// Pr{|A| = A} for A = 0..N, by summing the probability of every subset of
/// size A. Exponential in N, so only N <= 20 is accepted.
inline std::vector<double> participant_distribution(std::span<const double> gammas) {
  const std::size_t n = gammas.size();
  if (n > 20) throw std::invalid_argument("participant_distribution: N > 20");
  std::vector<double> dist(n + 1, 0.0);
  const std::size_t subsets = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    double p = 1.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        p *= gammas[i];
        ++count;
      } else {
        p *= 1.0 - gammas[i];
      }
    }
    dist[count] += p;
  }
  return dist;
}

/// Devices whose participation probability for the message norms they would
/// send is below `threshold`. `s_norm2[i]` is ||s_i||^2 for device i.
inline std::vector<std::size_t> bottleneck_devices(std::span<const double> s_norm2, double beta,
                                                   double p_max,
                                                   std::span<const FadingParams> fading,
                                                   double threshold, std::size_t samples,
                                                   Rng& rng) {
  require_same_size(s_norm2.size(), fading.size(), "bottleneck_devices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s_norm2.size(); ++i) {
    if (participation_probability(s_norm2[i], beta, p_max, fading[i], samples, rng) < threshold) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace dpd
