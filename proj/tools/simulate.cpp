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
// simulate: run a configured experiment (or a named figure scenario) and
// write per-round, aggregate and metadata files.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "dpd/harness/config.hpp"
#include "dpd/harness/experiment.hpp"
#include "dpd/harness/output.hpp"
#include "dpd/harness/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void report(const std::string& label, const dpd::harness::MonteCarloResult& r) {
  std::cout << label << ": runs=" << r.runs.size() << " diverged=" << r.diverged;
  if (!r.aggregate.empty()) {
    const auto& last = r.aggregate.back();
    std::cout << " rounds=" << last.round << " violation=" << last.violation_mean
              << " objective=" << last.objective_mean << " sim_time_s=" << last.sim_time_s_mean;
  }
  if (auto p = r.mean_final_price()) std::cout << " price=" << *p;
  std::cout << '\n';
}

void run_one(const std::string& label, const dpd::harness::ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const auto result = dpd::harness::run_monte_carlo(cfg);
  dpd::harness::write_outputs(result, dir);
  report(label, result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DPD-AirComp experiment simulator"};
  std::string config_path;
  std::optional<std::string> scenario_name;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> channel;
  app.add_option("--config", config_path, "experiment configuration file")->required();
  app.add_option("--scenario", scenario_name, "named figure scenario");
  app.add_option("--runs", runs, "Monte Carlo runs (overrides the config)");
  app.add_option("--seed", seed, "base seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--channel", channel, "aircomp or error_free (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    dpd::harness::ExperimentConfig cfg = dpd::harness::load_config(config_path);
    if (runs) cfg.runs = *runs;
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output = *out_dir;
    if (channel) cfg.channel_mode = dpd::harness::parse_channel_mode(*channel, "--channel");
    dpd::harness::validate(cfg);

    const std::filesystem::path out(cfg.output);
    if (!scenario_name) {
      run_one(std::string(dpd::harness::to_string(cfg.channel_mode)), cfg, out);
      return kExitOk;
    }
    const auto family = dpd::harness::scenario(*scenario_name, cfg);
    for (const auto* group : {&family.members, &family.baselines}) {
      for (const auto& m : *group) run_one(family.name + "/" + m.label, m.config, out / family.name / m.label);
    }
    return kExitOk;
  } catch (const dpd::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dpd::harness::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
