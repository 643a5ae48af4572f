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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dpd/harness/config.hpp"
#include "dpd/harness/experiment.hpp"

namespace dpd::harness {

/// File-system failure, carrying the path involved.
class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline constexpr const char* kRoundsHeader =
    "run_id,round,sim_time_s,participants,violation,objective,price,sum_rate";
inline constexpr const char* kAggregateHeader =
    "round,sim_time_s_mean,violation_mean,violation_stderr,objective_mean,objective_stderr,participants_mean";
inline constexpr const char* kBoundsHeader =
    "round,delta,r_star,violation_bound,gap_upper,gap_lower,violation_mean,violation_stderr,gap_mean,gap_stderr";

namespace detail {

// Shortest representation that reads back to the same double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace detail

inline void write_rounds_csv(std::ostream& out, const std::vector<RunResult>& runs) {
  out << kRoundsHeader << '\n';
  for (const RunResult& r : runs) {
    for (const RunRow& row : r.rows) {
      out << r.run_id << ',' << row.round << ',' << detail::num(row.sim_time_s) << ',' << row.participants << ','
          << detail::num(row.violation) << ',' << detail::num(row.objective) << ',' << detail::opt_num(row.price)
          << ',' << detail::opt_num(row.sum_rate) << '\n';
    }
  }
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const AggregateRow& r : rows) {
    out << r.round << ',' << detail::num(r.sim_time_s_mean) << ',' << detail::num(r.violation_mean) << ','
        << detail::num(r.violation_stderr) << ',' << detail::num(r.objective_mean) << ','
        << detail::num(r.objective_stderr) << ',' << detail::num(r.participants_mean) << '\n';
  }
}

inline void write_bounds_csv(std::ostream& out, const BoundReport& rep) {
  out << kBoundsHeader << '\n';
  for (std::size_t j = 0; j < rep.rows.size(); ++j) {
    const BoundRow& b = rep.rows[j];
    out << b.round << ',' << detail::num(b.delta) << ',' << detail::num(b.r_star) << ','
        << detail::num(b.violation_bound) << ',' << detail::num(b.gap_upper) << ',' << detail::num(b.gap_lower)
        << ',' << detail::num(rep.violation_mean[j]) << ',' << detail::num(rep.violation_stderr[j]) << ','
        << detail::num(rep.gap_mean[j]) << ',' << detail::num(rep.gap_stderr[j]) << '\n';
  }
}

inline nlohmann::ordered_json metadata(const MonteCarloResult& res) {
  nlohmann::ordered_json m;
  m["use_case"] = std::string(to_string(res.config.use_case));
  m["channel"] = std::string(to_string(res.config.channel_mode));
  m["runs_requested"] = res.config.runs;
  m["runs_used"] = res.runs.size() - res.diverged;
  m["diverged"] = res.diverged;
  m["divergence_policy"] = "diverged runs are excluded from every mean and counted here";
  auto diverged = nlohmann::ordered_json::array();
  auto excluded = nlohmann::ordered_json::object();
  for (const RunResult& r : res.runs) {
    if (r.diverged) diverged.push_back({{"run_id", r.run_id}, {"seed", r.seed}, {"diagnostic", r.diagnostic}});
    if (!r.excluded.empty()) excluded[std::to_string(r.run_id)] = r.excluded;
  }
  m["diverged_runs"] = diverged;
  m["bottleneck_exclusions"] = excluded;
  if (res.config.use_case == UseCase::kSmartGrid) {
    auto prices = nlohmann::ordered_json::array();
    std::size_t converged = 0;
    for (const RunResult& r : res.runs) {
      if (r.diverged || !r.final_price) continue;
      prices.push_back({{"run_id", r.run_id}, {"final_price", *r.final_price},
                        {"converged", r.price_converged}, {"outer_iterations", r.outer_iterations}});
      if (r.price_converged) ++converged;
    }
    m["final_prices"] = prices;
    m["price_converged_runs"] = converged;
    if (auto p = res.mean_final_price()) m["mean_final_price"] = *p;
  }
  if (res.bounds) {
    m["bounds"] = {{"G", res.bounds->constants.G},
                   {"L", res.bounds->constants.L},
                   {"R", res.bounds->constants.R},
                   {"x0_gap2", res.bounds->constants.x0_gap2},
                   {"zeta", res.bounds->zeta},
                   {"zeta_source", "Slater point (u*, U(u*) - 1): gamma = 1, f0(x_bar) - q* = N"},
                   {"inflation", kConstantInflation}};
  }
  m["config"] = serialize_config(res.config);
  return m;
}

namespace detail {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

}  // namespace detail

/// Writes rounds.csv, aggregate.csv, metadata.json and (when evaluated)
/// bounds.csv into `dir`, creating it if needed.
inline void write_outputs(const MonteCarloResult& res, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
  detail::write_file(dir / "rounds.csv", [&](std::ostream& o) { write_rounds_csv(o, res.runs); });
  detail::write_file(dir / "aggregate.csv", [&](std::ostream& o) { write_aggregate_csv(o, res.aggregate); });
  if (res.bounds) detail::write_file(dir / "bounds.csv", [&](std::ostream& o) { write_bounds_csv(o, *res.bounds); });
  detail::write_file(dir / "metadata.json", [&](std::ostream& o) { o << metadata(res).dump(2) << '\n'; });
}

}  // namespace dpd::harness
