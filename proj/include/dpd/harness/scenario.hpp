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

#include <string>
#include <vector>

#include "dpd/harness/config.hpp"

namespace dpd::harness {

struct ScenarioMember {
  std::string label;  ///< output sub-directory
  ExperimentConfig config;
};

/// A figure's sweep plus the error-free references it is compared against.
struct ScenarioFamily {
  std::string name;
  std::vector<ScenarioMember> members;
  std::vector<ScenarioMember> baselines;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"fig2_stepsizes", "fig3_beta_caseB", "fig4_beta_caseA",
                                                 "fig5_dualset", "fig6_timing"};
  return names;
}

namespace detail {

inline std::string label_of(double v) {
  std::string s = format_double(v);
  for (char& ch : s) {
    if (ch == '+') ch = 'p';
  }
  return s;
}

inline ExperimentConfig with_mode(ExperimentConfig c, ChannelMode m) {
  c.channel_mode = m;
  return c;
}

}  // namespace detail

/// Config family for a named figure, derived from `base`. The sweep only
/// touches the figure's independent variable.
inline ScenarioFamily scenario(const std::string& name, const ExperimentConfig& base) {
  auto need = [&](UseCase u) {
    if (base.use_case != u) {
      throw ConfigError("experiment.use_case", "scenario " + name + " needs use_case = " + std::string(to_string(u)));
    }
  };
  const ExperimentConfig air = detail::with_mode(base, ChannelMode::kAirComp);
  const ExperimentConfig free = detail::with_mode(base, ChannelMode::kErrorFree);
  ScenarioFamily f;
  f.name = name;
  if (name == "fig2_stepsizes") {
    need(UseCase::kFdma);
    for (double c2 : {1e5, 1e4, 1e3}) {
      ExperimentConfig c = air;
      c.solver.c1 = 1.0;
      c.solver.c2 = c2;
      f.members.push_back({"c2_" + detail::label_of(c2), c});
      f.baselines.push_back({"c2_" + detail::label_of(c2) + "_error_free", detail::with_mode(c, ChannelMode::kErrorFree)});
    }
  } else if (name == "fig3_beta_caseB" || name == "fig4_beta_caseA") {
    const bool b = name == "fig3_beta_caseB";
    need(b ? UseCase::kFdma : UseCase::kSmartGrid);
    const std::vector<double> betas = b ? std::vector<double>{1e4, 1e8, 1e10} : std::vector<double>{1e4, 1e6, 1e8};
    for (double beta : betas) {
      ExperimentConfig c = air;
      c.channel.beta = beta;
      f.members.push_back({"beta_" + detail::label_of(beta), c});
    }
    f.baselines.push_back({"error_free", free});
  } else if (name == "fig5_dualset") {
    need(UseCase::kSmartGrid);
    for (double v : {1.0, 2.0, 3.0, 5.0}) {
      ExperimentConfig c = air;
      c.solver.zeta = v;
      c.solver.theta = v;
      f.members.push_back({"zeta_" + detail::label_of(v) + "_theta_" + detail::label_of(v), c});
    }
    f.baselines.push_back({"error_free", free});
  } else if (name == "fig6_timing") {
    need(UseCase::kFdma);
    f.members.push_back({"aircomp", air});
    f.baselines.push_back({"error_free", free});
  } else {
    std::string valid;
    for (const std::string& n : scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("--scenario", "unknown scenario '" + name + "' (valid: " + valid + ")");
  }
  return f;
}

}  // namespace dpd::harness
