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
#include <limits>
#include <random>
#include <stdexcept>

#include "dpd/core/random.hpp"

namespace dpd {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Large-scale and Rician parameters of one device's uplink.
struct FadingParams {
  double t0 = db_to_linear(-25.0);  ///< path loss at d0, linear
  double d_over_d0 = 10.0;
  double exponent = 2.2;
  double epsilon = 10.0;  ///< Rician K-factor; +inf means line-of-sight only

  /// T0 (d/d0)^-a, which is also E|h|^2.
  double path_gain() const { return t0 * std::pow(d_over_d0, -exponent); }

  void validate() const {
    if (!(t0 > 0.0)) throw std::invalid_argument("FadingParams: T0 must be positive");
    if (!(d_over_d0 >= 1.0)) throw std::invalid_argument("FadingParams: d/d0 must be >= 1");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("FadingParams: epsilon must be >= 0");
  }
};

/// Draws |h| for h = sqrt(T0 (d/d0)^-a) (sqrt(e/(e+1)) h_LoS + sqrt(1/(e+1)) h_NLoS)
/// with h_LoS = 1 and h_NLoS ~ CN(0, 1).
inline double sample_fading(const FadingParams& p, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re_n = normal(rng) * std::sqrt(0.5);
  const double im_n = normal(rng) * std::sqrt(0.5);
  double los_w = 1.0;
  double nlos_w = 0.0;
  if (std::isfinite(p.epsilon)) {
    los_w = std::sqrt(p.epsilon / (p.epsilon + 1.0));
    nlos_w = std::sqrt(1.0 / (p.epsilon + 1.0));
  }
  const double re = los_w + nlos_w * re_n;
  const double im = nlos_w * im_n;
  return std::sqrt(p.path_gain()) * std::hypot(re, im);
}

}  // namespace dpd
