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
#include <span>
#include <stdexcept>
#include <vector>

#include "dpd/channel/aircomp.hpp"
#include "dpd/channel/fading.hpp"
#include "dpd/channel/timing.hpp"
#include "dpd/core/solver.hpp"

namespace dpd {

/// Fading draw and participant set of one round.
struct RoundChannelRealization {
  Vec h;                      ///< |h_i^k|, one per device
  std::vector<bool> participants;
};

/// Analog over-the-air aggregation with channel inversion, the peak-power
/// participation rule and receiver noise scaled by sqrt(beta).
class AirCompChannel {
 public:
  AirCompChannel(std::vector<FadingParams> devices, double sigma2_w, double p_max_w, double beta,
                 double round_duration_s)
      : devices_(std::move(devices)),
        sigma2_(sigma2_w),
        p_max_(p_max_w),
        beta_(beta),
        duration_(round_duration_s) {
    if (sigma2_ < 0.0) throw std::invalid_argument("AirCompChannel: sigma2 < 0");
    if (!(p_max_ > 0.0)) throw std::invalid_argument("AirCompChannel: P_max <= 0");
    if (!(beta_ > 0.0)) throw std::invalid_argument("AirCompChannel: beta <= 0");
    for (const auto& d : devices_) d.validate();
  }

  /// Every device is heard regardless of its channel (used for the
  /// noiseless-equivalence check).
  void force_full_participation(bool on) { force_full_ = on; }

  RoundAggregate transmit(std::span<const Vec> messages, Rng& rng) {
    require_same_size(messages.size(), devices_.size(), "AirCompChannel::transmit");
    const std::size_t dim = messages.empty() ? 0 : messages.front().size();
    last_.h.resize(devices_.size());
    last_.participants.assign(devices_.size(), false);

    std::vector<Vec> heard;
    heard.reserve(messages.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      const double h = sample_fading(devices_[i], rng);
      last_.h[i] = h;
      const bool in = force_full_ || participates(norm2(messages[i]), h, beta_, p_max_);
      if (in) {
        last_.participants[i] = true;
        heard.push_back(messages[i]);
      }
    }

    RoundAggregate out;
    out.participants = heard.size();
    out.value = aggregate(heard, dim, beta_, sigma2_, rng);
    out.duration_s = duration_;
    return out;
  }

  const RoundChannelRealization& last_realization() const { return last_; }
  const std::vector<FadingParams>& devices() const { return devices_; }
  double beta() const { return beta_; }
  double sigma2() const { return sigma2_; }
  double p_max() const { return p_max_; }

 private:
  std::vector<FadingParams> devices_;
  double sigma2_;
  double p_max_;
  double beta_;
  double duration_;
  bool force_full_ = false;
  RoundChannelRealization last_;
};

/// Error-free digital baseline: every device is decoded exactly, one after the
/// other, so the round takes the TDMA airtime of the current fading draw.
class TdmaChannel {
 public:
  TdmaChannel(std::vector<FadingParams> devices, double symbols, double p_max_w,
              double noise_power_w, double bandwidth_hz)
      : devices_(std::move(devices)),
        symbols_(symbols),
        p_max_(p_max_w),
        noise_power_(noise_power_w),
        bandwidth_(bandwidth_hz) {
    for (const auto& d : devices_) d.validate();
  }

  RoundAggregate transmit(std::span<const Vec> messages, Rng& rng) {
    require_same_size(messages.size(), devices_.size(), "TdmaChannel::transmit");
    Vec h(devices_.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) h[i] = sample_fading(devices_[i], rng);
    RoundAggregate out = PerfectChannel{}.transmit(messages, rng);
    out.duration_s = tdma_round_duration(h, symbols_, p_max_, noise_power_, bandwidth_);
    return out;
  }

 private:
  std::vector<FadingParams> devices_;
  double symbols_;
  double p_max_;
  double noise_power_;
  double bandwidth_;
};

}  // namespace dpd
