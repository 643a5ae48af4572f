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
#include <span>
#include <stdexcept>

#include "dpd/core/vector_ops.hpp"

namespace dpd {

/// Diminishing step a_k = c1 / (c2 + k). Square summable, not summable.
class HarmonicStep {
 public:
  HarmonicStep(double c1, double c2) : c1_(c1), c2_(c2) {
    if (!(c1 > 0.0) || !(c2 > 0.0)) {
      throw std::invalid_argument("HarmonicStep: c1 and c2 must be positive");
    }
  }

  double operator()(std::size_t k) const { return c1_ / (c2_ + static_cast<double>(k)); }

  double c1() const { return c1_; }
  double c2() const { return c2_; }

 private:
  double c1_;
  double c2_;
};

inline double step_size(const HarmonicStep& schedule, std::size_t k) { return schedule(k); }

/// r*_k = (zeta + sqrt(2 zeta^2 + delta_k Z_k)) / 2, the radius that minimises
/// the constraint-violation bound for a given round.
inline double optimal_r(double zeta, double delta_k, double z_k) {
  return 0.5 * (zeta + std::sqrt(2.0 * zeta * zeta + delta_k * z_k));
}

enum class DualSetMode { kPractical, kOptimalR };

/// Upper edge of the box D_k = { 0 <= lambda_i <= bound(k) }.
///
/// Practical mode uses zeta' + vartheta * sqrt(Z_k). Optimal-r mode uses
/// zeta + r*_k with delta_k supplied by the caller (it depends on constants
/// that are only known after the fact, so it is mostly used for analysis).
struct DualSetSchedule {
  DualSetMode mode = DualSetMode::kPractical;
  double zeta_prime = 2.0;
  double vartheta = 2.0;
  /// delta_k as a function of (k, Z_k); only read in optimal-r mode.
  std::function<double(std::size_t, double)> delta;

  static DualSetSchedule practical(double zeta_prime, double vartheta) {
    if (zeta_prime < 0.0 || !(vartheta > 0.0)) {
      throw std::invalid_argument("DualSetSchedule: need zeta' >= 0 and vartheta > 0");
    }
    DualSetSchedule s;
    s.mode = DualSetMode::kPractical;
    s.zeta_prime = zeta_prime;
    s.vartheta = vartheta;
    return s;
  }

  static DualSetSchedule with_optimal_r(double zeta,
                                        std::function<double(std::size_t, double)> delta) {
    if (zeta < 0.0) throw std::invalid_argument("DualSetSchedule: need zeta >= 0");
    DualSetSchedule s;
    s.mode = DualSetMode::kOptimalR;
    s.zeta_prime = zeta;
    s.vartheta = 0.0;
    s.delta = std::move(delta);
    return s;
  }
};

/// Bound of D_k given the partial step sum Z_k = sum_{j<k} a_j.
inline double dual_bound(const DualSetSchedule& sched, std::size_t k, double z_k) {
  if (z_k < 0.0) throw std::invalid_argument("dual_bound: negative step sum");
  if (sched.mode == DualSetMode::kPractical) {
    return sched.zeta_prime + sched.vartheta * std::sqrt(z_k);
  }
  const double d = (sched.delta && z_k > 0.0) ? sched.delta(k, z_k) : 0.0;
  return sched.zeta_prime + optimal_r(sched.zeta_prime, d, z_k);
}

/// One device's projected dual ascent step.
inline double dual_update(double lambda_i, double a_k, double f_i_value, double bound) {
  return std::clamp(lambda_i + a_k * f_i_value, 0.0, bound);
}

/// x+ = P_X[x - a_k (g0 + aggregate)].
template <typename Projection>
Vec primal_update(std::span<const double> x, double a_k, std::span<const double> g0,
                  std::span<const double> aggregate, const Projection& project) {
  require_same_size(x.size(), g0.size(), "primal_update(g0)");
  require_same_size(x.size(), aggregate.size(), "primal_update(aggregate)");
  Vec moved(x.begin(), x.end());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] -= a_k * (g0[i] + aggregate[i]);
  Vec out = project(std::span<const double>(moved));
  require_same_size(x.size(), out.size(), "primal_update(projection)");
  return out;
}

/// Iterates plus the step-weighted running sums used by the averaged point.
struct SolverState {
  Vec x;
  Vec lambda;
  Vec x_avg_num;
  Vec lambda_avg_num;
  double z = 0.0;
  std::size_t round = 0;

  SolverState() = default;
  SolverState(Vec x0, Vec lambda0)
      : x(std::move(x0)),
        lambda(std::move(lambda0)),
        x_avg_num(x.size(), 0.0),
        lambda_avg_num(lambda.size(), 0.0) {}

  /// Folds the current iterate into the running sums with weight a_k.
  void accumulate(double a_k) {
    axpy(a_k, x, x_avg_num);
    axpy(a_k, lambda, lambda_avg_num);
    z += a_k;
  }
};

struct WeightedAverages {
  Vec x_hat;
  Vec lambda_hat;
};

class UndefinedAverageError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline WeightedAverages weighted_averages(const SolverState& state) {
  if (!(state.z > 0.0)) throw UndefinedAverageError("weighted_averages: Z_k = 0");
  WeightedAverages out{state.x_avg_num, state.lambda_avg_num};
  for (double& v : out.x_hat) v /= state.z;
  for (double& v : out.lambda_hat) v /= state.z;
  return out;
}

}  // namespace dpd
