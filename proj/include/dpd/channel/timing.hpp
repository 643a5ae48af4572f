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
#include <span>
#include <stdexcept>

namespace dpd {

/// Bits per quantised entry in the digital baseline: 1 sign bit plus
/// log2(1 + q1) = 16 magnitude bits.
inline constexpr double kBitsPerEntry = 17.0;
/// Per-device packet header in bits.
inline constexpr double kHeaderBits = 64.0;

class InvalidChannelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One analog aggregation round occupies L symbol slots at symbol rate B.
inline double aircomp_round_duration(double symbols, double bandwidth_hz) {
  if (!(symbols >= 1.0) || !(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("aircomp_round_duration: need L >= 1 and B > 0");
  }
  return symbols / bandwidth_hz;
}

/// One TDMA round: every device sends a header plus L quantised entries at
/// its Shannon rate, one after the other. The sum of per-device symbol
/// counts is divided by B to obtain seconds.
inline double tdma_round_duration(std::span<const double> h, double symbols, double p_max,
                                  double noise_power_w, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("tdma_round_duration: B must be positive");
  const double payload = kHeaderBits + symbols * kBitsPerEntry;
  double total = 0.0;
  for (double hi : h) {
    const double snr = p_max * hi * hi / noise_power_w;
    if (!(snr > 0.0) || !std::isfinite(snr)) {
      throw InvalidChannelError("tdma_round_duration: non-positive SNR");
    }
    total += payload / std::log2(1.0 + snr);
  }
  return total / bandwidth_hz;
}

}  // namespace dpd
