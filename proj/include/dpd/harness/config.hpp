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

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/usecases/fdma.hpp"
#include "dpd/usecases/smart_grid.hpp"

namespace dpd::harness {

enum class UseCase { kSmartGrid, kFdma };
enum class ChannelMode { kAirComp, kErrorFree };

/// Raised for malformed, unknown, missing or out-of-range configuration
/// entries. `key()` is the offending "section.key" (or section name).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SolverConfig {
  std::size_t rounds = 500;
  double c1 = 2.0;  ///< a_k = c1 / (c2 + k)
  double c2 = 3.0;
  double zeta = 2.0;   ///< zeta' of the practical dual set
  double theta = 2.0;  ///< vartheta of the practical dual set
  double divergence_limit = 1e9;

  bool operator==(const SolverConfig&) const = default;
};

struct ChannelConfig {
  double B = 1e6;             ///< Hz
  double sigma2_dbm = -90.0;  ///< receiver noise power
  double P_max = 1.0;         ///< W
  double beta = 1e4;
  double d_over_d0_min = 10.0;
  double d_over_d0_max = 20.0;
  double a = 2.2;        ///< path-loss exponent
  double epsilon = 10.0;  ///< Rician factor
  double T0_db = -25.0;
  double L = 40.0;  ///< symbols per AirComp round
  double bottleneck_threshold = 1e-3;
  std::size_t participation_samples = 10000;

  bool operator==(const ChannelConfig&) const = default;
};

struct SmartGridConfig {
  std::size_t N = 20;
  double b_min = 35.0;
  double b_max = 65.0;
  double s_min = 1.0;
  double s_max = 2.0;
  double C = 99.0;
  double price0 = 35.0;
  double u0_max = 9.9;  ///< start demands drawn from [0, u0_max]
  double price_tolerance = 1e-3;
  std::size_t max_outer = 50;
  smart_grid::PriceRule price_rule = smart_grid::PriceRule::kLargestDemand;

  bool operator==(const SmartGridConfig&) const = default;
};

struct FdmaConfig {
  std::size_t N = 10;
  std::size_t K = 64;
  double P = 1.0;              ///< total power budget, W
  double N0_dbm_hz = -174.0;
  double R_th = 2.85e6;        ///< bit/s
  double rate_unit = 100.0;    ///< bit/s per optimiser rate unit
  double power_unit = 1e-3;    ///< W per optimiser power unit
  fdma::Sharing sharing = fdma::Sharing::kPerBand;
  double init_spread = 0.5;    ///< start at uniform * U(1 - s, 1 + s)

  bool operator==(const FdmaConfig&) const = default;
};

struct ExperimentConfig {
  UseCase use_case = UseCase::kSmartGrid;
  ChannelMode channel_mode = ChannelMode::kAirComp;
  std::size_t runs = 500;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> instance_seed;  ///< fixes the instance across runs
  bool bounds = false;
  std::string output = "out";
  SolverConfig solver;
  ChannelConfig channel;
  SmartGridConfig smart_grid;
  FdmaConfig fdma;

  bool operator==(const ExperimentConfig&) const = default;

  /// Reference parameter set for the use case.
  static ExperimentConfig defaults(UseCase use_case) {
    ExperimentConfig c;
    c.use_case = use_case;
    if (use_case == UseCase::kSmartGrid) {
      c.solver = SolverConfig{500, 2.0, 3.0, 2.0, 2.0, 1e9};
      c.channel.beta = 1e4;
      c.channel.L = 2.0 * static_cast<double>(c.smart_grid.N);
    } else {
      c.solver = SolverConfig{100, 1.0, 1e5, 2.0, 1.0, 1e9};
      c.channel.beta = 1e6;
      c.channel.L = 2.0 * static_cast<double>(c.fdma.K);
    }
    return c;
  }
};

inline std::string_view to_string(UseCase u) { return u == UseCase::kSmartGrid ? "smart_grid" : "fdma"; }
inline std::string_view to_string(ChannelMode m) { return m == ChannelMode::kAirComp ? "aircomp" : "error_free"; }

inline ChannelMode parse_channel_mode(const std::string& v, const std::string& key = "experiment.channel") {
  if (v == "aircomp") return ChannelMode::kAirComp;
  if (v == "error_free") return ChannelMode::kErrorFree;
  throw ConfigError(key, "expected aircomp or error_free, got '" + v + "'");
}

namespace detail {

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || std::isnan(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

struct Field {
  std::string section;
  std::string name;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;  ///< nullopt: omit
  std::function<void(ExperimentConfig&, const std::string& key, const std::string&)> set;
};

template <typename Member>
Field real(std::string section, std::string name, Member member) {
  return {std::move(section), std::move(name),
          [member](const ExperimentConfig& c) -> std::optional<std::string> { return format_double(member(const_cast<ExperimentConfig&>(c))); },
          [member](ExperimentConfig& c, const std::string& key, const std::string& v) { member(c) = parse_double(key, v); }};
}

template <typename Member>
Field count(std::string section, std::string name, Member member) {
  return {std::move(section), std::move(name),
          [member](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string(member(const_cast<ExperimentConfig&>(c))); },
          [member](ExperimentConfig& c, const std::string& key, const std::string& v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_uint(key, v));
          }};
}

// Keys in canonical (serialisation) order.
inline const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back({"experiment", "use_case",
                 [](const ExperimentConfig& c) -> std::optional<std::string> { return std::string(to_string(c.use_case)); },
                 [](ExperimentConfig&, const std::string&, const std::string&) {}});
    f.push_back({"experiment", "channel",
                 [](const ExperimentConfig& c) -> std::optional<std::string> { return std::string(to_string(c.channel_mode)); },
                 [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.channel_mode = parse_channel_mode(v, key); }});
    f.push_back(count("experiment", "runs", [](ExperimentConfig& c) -> std::size_t& { return c.runs; }));
    f.push_back(count("experiment", "seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.seed; }));
    f.push_back({"experiment", "instance_seed",
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!c.instance_seed) return std::nullopt;
                   return std::to_string(*c.instance_seed);
                 },
                 [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.instance_seed = parse_uint(key, v); }});
    f.push_back({"experiment", "bounds",
                 [](const ExperimentConfig& c) -> std::optional<std::string> { return std::string(c.bounds ? "true" : "false"); },
                 [](ExperimentConfig& c, const std::string& key, const std::string& v) { c.bounds = parse_bool(key, v); }});
    f.push_back({"experiment", "output",
                 [](const ExperimentConfig& c) -> std::optional<std::string> { return c.output; },
                 [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output = v; }});

    f.push_back(count("solver", "rounds", [](ExperimentConfig& c) -> std::size_t& { return c.solver.rounds; }));
    f.push_back(real("solver", "c1", [](ExperimentConfig& c) -> double& { return c.solver.c1; }));
    f.push_back(real("solver", "c2", [](ExperimentConfig& c) -> double& { return c.solver.c2; }));
    f.push_back(real("solver", "zeta", [](ExperimentConfig& c) -> double& { return c.solver.zeta; }));
    f.push_back(real("solver", "theta", [](ExperimentConfig& c) -> double& { return c.solver.theta; }));
    f.push_back(real("solver", "divergence_limit", [](ExperimentConfig& c) -> double& { return c.solver.divergence_limit; }));

    f.push_back(real("channel", "B", [](ExperimentConfig& c) -> double& { return c.channel.B; }));
    f.push_back(real("channel", "sigma2_dbm", [](ExperimentConfig& c) -> double& { return c.channel.sigma2_dbm; }));
    f.push_back(real("channel", "P_max", [](ExperimentConfig& c) -> double& { return c.channel.P_max; }));
    f.push_back(real("channel", "beta", [](ExperimentConfig& c) -> double& { return c.channel.beta; }));
    f.push_back(real("channel", "d_over_d0_min", [](ExperimentConfig& c) -> double& { return c.channel.d_over_d0_min; }));
    f.push_back(real("channel", "d_over_d0_max", [](ExperimentConfig& c) -> double& { return c.channel.d_over_d0_max; }));
    f.push_back(real("channel", "a", [](ExperimentConfig& c) -> double& { return c.channel.a; }));
    f.push_back(real("channel", "epsilon", [](ExperimentConfig& c) -> double& { return c.channel.epsilon; }));
    f.push_back(real("channel", "T0_db", [](ExperimentConfig& c) -> double& { return c.channel.T0_db; }));
    f.push_back(real("channel", "L", [](ExperimentConfig& c) -> double& { return c.channel.L; }));
    f.push_back(real("channel", "bottleneck_threshold", [](ExperimentConfig& c) -> double& { return c.channel.bottleneck_threshold; }));
    f.push_back(count("channel", "participation_samples", [](ExperimentConfig& c) -> std::size_t& { return c.channel.participation_samples; }));

    f.push_back(count("smart_grid", "N", [](ExperimentConfig& c) -> std::size_t& { return c.smart_grid.N; }));
    f.push_back(real("smart_grid", "b_min", [](ExperimentConfig& c) -> double& { return c.smart_grid.b_min; }));
    f.push_back(real("smart_grid", "b_max", [](ExperimentConfig& c) -> double& { return c.smart_grid.b_max; }));
    f.push_back(real("smart_grid", "s_min", [](ExperimentConfig& c) -> double& { return c.smart_grid.s_min; }));
    f.push_back(real("smart_grid", "s_max", [](ExperimentConfig& c) -> double& { return c.smart_grid.s_max; }));
    f.push_back(real("smart_grid", "C", [](ExperimentConfig& c) -> double& { return c.smart_grid.C; }));
    f.push_back(real("smart_grid", "price0", [](ExperimentConfig& c) -> double& { return c.smart_grid.price0; }));
    f.push_back(real("smart_grid", "u0_max", [](ExperimentConfig& c) -> double& { return c.smart_grid.u0_max; }));
    f.push_back(real("smart_grid", "price_tolerance", [](ExperimentConfig& c) -> double& { return c.smart_grid.price_tolerance; }));
    f.push_back(count("smart_grid", "max_outer", [](ExperimentConfig& c) -> std::size_t& { return c.smart_grid.max_outer; }));
    f.push_back({"smart_grid", "price_rule",
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   return std::string(c.smart_grid.price_rule == smart_grid::PriceRule::kLargestDemand ? "largest_demand" : "mean_positive");
                 },
                 [](ExperimentConfig& c, const std::string& key, const std::string& v) {
                   if (v == "largest_demand") c.smart_grid.price_rule = smart_grid::PriceRule::kLargestDemand;
                   else if (v == "mean_positive") c.smart_grid.price_rule = smart_grid::PriceRule::kMeanPositive;
                   else throw ConfigError(key, "expected largest_demand or mean_positive, got '" + v + "'");
                 }});

    f.push_back(count("fdma", "N", [](ExperimentConfig& c) -> std::size_t& { return c.fdma.N; }));
    f.push_back(count("fdma", "K", [](ExperimentConfig& c) -> std::size_t& { return c.fdma.K; }));
    f.push_back(real("fdma", "P", [](ExperimentConfig& c) -> double& { return c.fdma.P; }));
    f.push_back(real("fdma", "N0_dbm_hz", [](ExperimentConfig& c) -> double& { return c.fdma.N0_dbm_hz; }));
    f.push_back(real("fdma", "R_th", [](ExperimentConfig& c) -> double& { return c.fdma.R_th; }));
    f.push_back(real("fdma", "rate_unit", [](ExperimentConfig& c) -> double& { return c.fdma.rate_unit; }));
    f.push_back(real("fdma", "power_unit", [](ExperimentConfig& c) -> double& { return c.fdma.power_unit; }));
    f.push_back({"fdma", "sharing",
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   return std::string(c.fdma.sharing == fdma::Sharing::kPerBand ? "per_band" : "per_user");
                 },
                 [](ExperimentConfig& c, const std::string& key, const std::string& v) {
                   if (v == "per_band") c.fdma.sharing = fdma::Sharing::kPerBand;
                   else if (v == "per_user") c.fdma.sharing = fdma::Sharing::kPerUser;
                   else throw ConfigError(key, "expected per_band or per_user, got '" + v + "'");
                 }});
    f.push_back(real("fdma", "init_spread", [](ExperimentConfig& c) -> double& { return c.fdma.init_spread; }));
    return f;
  }();
  return all;
}

inline const Field* find_field(const std::string& section, const std::string& name) {
  for (const Field& f : fields()) {
    if (f.section == section && f.name == name) return &f;
  }
  return nullptr;
}

inline void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace detail

/// Range checks; throws ConfigError naming the first bad key.
inline void validate(const ExperimentConfig& c) {
  using detail::require;
  require(c.runs >= 1, "experiment.runs", "must be >= 1");
  require(!c.output.empty(), "experiment.output", "must not be empty");
  require(!c.bounds || c.use_case == UseCase::kSmartGrid, "experiment.bounds", "only available for use_case = smart_grid");

  require(c.solver.rounds >= 1, "solver.rounds", "must be >= 1");
  require(c.solver.c1 > 0.0 && std::isfinite(c.solver.c1), "solver.c1", "must be positive");
  require(c.solver.c2 > 0.0 && std::isfinite(c.solver.c2), "solver.c2", "must be positive");
  require(c.solver.zeta >= 0.0 && std::isfinite(c.solver.zeta), "solver.zeta", "must be >= 0");
  require(c.solver.theta > 0.0 && std::isfinite(c.solver.theta), "solver.theta", "must be positive");
  require(c.solver.divergence_limit > 0.0, "solver.divergence_limit", "must be positive");

  const ChannelConfig& ch = c.channel;
  require(ch.B > 0.0 && std::isfinite(ch.B), "channel.B", "must be positive");
  require(std::isfinite(ch.sigma2_dbm), "channel.sigma2_dbm", "must be finite");
  require(ch.P_max > 0.0 && std::isfinite(ch.P_max), "channel.P_max", "must be positive");
  require(ch.beta > 0.0 && std::isfinite(ch.beta), "channel.beta", "must be positive");
  require(ch.d_over_d0_min >= 1.0, "channel.d_over_d0_min", "must be >= 1");
  require(ch.d_over_d0_max >= ch.d_over_d0_min && std::isfinite(ch.d_over_d0_max), "channel.d_over_d0_max", "must be >= d_over_d0_min");
  require(ch.a > 0.0 && std::isfinite(ch.a), "channel.a", "must be positive");
  require(ch.epsilon >= 0.0, "channel.epsilon", "must be >= 0");
  require(std::isfinite(ch.T0_db), "channel.T0_db", "must be finite");
  require(ch.L >= 1.0 && std::isfinite(ch.L), "channel.L", "must be >= 1");
  require(ch.bottleneck_threshold >= 0.0 && ch.bottleneck_threshold <= 1.0, "channel.bottleneck_threshold", "must lie in [0, 1]");
  require(ch.participation_samples >= 1, "channel.participation_samples", "must be >= 1");

  const SmartGridConfig& sg = c.smart_grid;
  require(sg.N >= 1, "smart_grid.N", "must be >= 1");
  require(sg.b_min > 0.0, "smart_grid.b_min", "must be positive");
  require(sg.b_max >= sg.b_min && std::isfinite(sg.b_max), "smart_grid.b_max", "must be >= b_min");
  require(sg.s_min > 0.0, "smart_grid.s_min", "must be positive");
  require(sg.s_max >= sg.s_min && std::isfinite(sg.s_max), "smart_grid.s_max", "must be >= s_min");
  require(sg.C > 0.0 && std::isfinite(sg.C), "smart_grid.C", "must be positive");
  require(sg.price0 >= 0.0 && std::isfinite(sg.price0), "smart_grid.price0", "must be >= 0");
  require(sg.u0_max >= 0.0 && std::isfinite(sg.u0_max), "smart_grid.u0_max", "must be >= 0");
  require(sg.price_tolerance > 0.0, "smart_grid.price_tolerance", "must be positive");
  require(sg.max_outer >= 1, "smart_grid.max_outer", "must be >= 1");

  const FdmaConfig& fd = c.fdma;
  require(fd.N >= 1, "fdma.N", "must be >= 1");
  require(fd.K >= 1, "fdma.K", "must be >= 1");
  require(fd.P > 0.0 && std::isfinite(fd.P), "fdma.P", "must be positive");
  require(std::isfinite(fd.N0_dbm_hz), "fdma.N0_dbm_hz", "must be finite");
  require(fd.R_th > 0.0 && std::isfinite(fd.R_th), "fdma.R_th", "must be positive");
  require(fd.rate_unit > 0.0 && std::isfinite(fd.rate_unit), "fdma.rate_unit", "must be positive");
  require(fd.power_unit > 0.0 && std::isfinite(fd.power_unit), "fdma.power_unit", "must be positive");
  require(fd.init_spread >= 0.0 && fd.init_spread < 1.0, "fdma.init_spread", "must lie in [0, 1)");
}

/// Parses the INI-style configuration. Omitted keys take the reference default
/// of the selected use case; the use-case section itself must be present.
inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }

  // read_ini drops sections without keys, so note every header separately.
  std::set<std::string> sections;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] != '[') continue;
      const auto close = line.find(']', first);
      if (close != std::string::npos) sections.insert(boost::algorithm::trim_copy(line.substr(first + 1, close - first - 1)));
    }
  }
  for (const std::string& section : sections) {
    if (section != "experiment" && section != "solver" && section != "channel" && section != "smart_grid" &&
        section != "fdma") {
      throw ConfigError(section, "unknown section");
    }
  }

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
    if (section != "experiment" && section != "solver" && section != "channel" && section != "smart_grid" &&
        section != "fdma") {
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [name, value] : body) {
      if (!detail::find_field(section, name)) throw ConfigError(section + "." + name, "unknown key");
    }
  }

  std::optional<UseCase> use_case;
  if (auto v = tree.get_optional<std::string>("experiment.use_case")) {
    if (*v == "smart_grid") use_case = UseCase::kSmartGrid;
    else if (*v == "fdma") use_case = UseCase::kFdma;
    else throw ConfigError("experiment.use_case", "expected smart_grid or fdma, got '" + *v + "'");
  } else {
    const bool sg = sections.count("smart_grid") > 0;
    const bool fd = sections.count("fdma") > 0;
    if (sg != fd) use_case = sg ? UseCase::kSmartGrid : UseCase::kFdma;
    else throw ConfigError("experiment.use_case", "missing (and not implied by a single use-case section)");
  }
  const std::string block(to_string(*use_case));
  if (sections.count(block) == 0) throw ConfigError(block, "missing required use-case section [" + block + "]");

  ExperimentConfig c = ExperimentConfig::defaults(*use_case);
  // L defaults follow the problem size, so apply the sizes first.
  bool explicit_l = false;
  for (const detail::Field& f : detail::fields()) {
    if (auto v = tree.get_optional<std::string>(f.section + "." + f.name)) {
      f.set(c, f.section + "." + f.name, *v);
      if (f.section == "channel" && f.name == "L") explicit_l = true;
    }
  }
  if (!explicit_l) {
    c.channel.L = c.use_case == UseCase::kSmartGrid ? 2.0 * static_cast<double>(c.smart_grid.N)
                                                    : 2.0 * static_cast<double>(c.fdma.K);
  }
  validate(c);
  return c;
}

/// Canonical text form: every key, in a fixed order, only the selected
/// use-case section.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  std::string current;
  const std::string skip(c.use_case == UseCase::kSmartGrid ? "fdma" : "smart_grid");
  for (const detail::Field& f : detail::fields()) {
    if (f.section == skip) continue;
    const auto v = f.get(c);
    if (!v) continue;
    if (f.section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << f.section << "]\n";
      current = f.section;
    }
    out << f.name << " = " << *v << '\n';
  }
  return out.str();
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace dpd::harness
