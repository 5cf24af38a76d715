/* Copyright 2026 The dthawkes Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dthawkes/error.hpp"
#include "dthawkes/model.hpp"
#include "dthawkes/simulate.hpp"

namespace dthawkes {

/// Malformed configuration. line() is 0 for command-line flags.
class ConfigError : public Error {
 public:
  ConfigError(int line, std::string key, const std::string& message)
      : Error(format(line, key, message)), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(int line, const std::string& key, const std::string& message) {
    std::string where = line > 0 ? "config:" + std::to_string(line) : std::string("config");
    if (!key.empty()) where += ": " + key;
    return where + ": " + message;
  }

  int line_;
  std::string key_;
};

/// Kernel description as written in a config section.
struct KernelSettings {
  std::string type = "geometric";  // geometric | power_law | table | zero
  std::optional<double> weight;
  std::optional<double> ratio;
  std::optional<double> scale;
  std::optional<double> exponent;
  std::optional<std::vector<double>> values;
};

struct RunConfig {
  struct Model {
    double nu = 0.1;
    KernelSettings kernel{"geometric", 0.05, 0.5, {}, {}, {}};
    std::string marks_type = "exponential";  // constant | exponential | discrete
    std::optional<double> marks_value;
    std::optional<double> marks_rate = 0.3;
    std::optional<std::vector<MarkAtom>> marks_atoms;
  } model;

  struct Simulation {
    std::int64_t horizon = 10000;
    std::int64_t n_paths = 10000;
    std::uint64_t master_seed = 20260101;
    RecordMode record_mode = RecordMode::kTerminalOnly;
    std::optional<std::int64_t> truncation;
    unsigned workers = 0;
  } simulation;

  struct Verification {
    double significance = 0.01;
    int bins = 50;
    std::vector<std::string> checks{"lln", "clt_n", "clt_l", "martingale", "tail"};
    std::optional<double> sigma2_N_override;
    std::optional<double> sigma2_L_override;
  } verification;

  struct Output {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    bool timestamp = true;
  } output;

  struct Seol {
    double alpha0 = 0.2;
    KernelSettings kernel{"table", {}, {}, {}, {}, std::vector<double>{0.3}};
  } seol;

  struct Oracle {
    std::int64_t horizon = 3;
    int z_cap = 10;
    std::uint64_t n_mc = 1000000;
  } oracle;
};

inline const std::set<std::string>& known_checks() {
  static const std::set<std::string> checks{"lln", "clt_n", "clt_l", "martingale", "lindeberg", "tail"};
  return checks;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, int line, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ConfigError(line, key, "cannot parse '" + text + "' as a number");
  }
  return value;
}

inline bool parse_bool(const std::string& text, int line, const std::string& key) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(line, key, "expected true or false, got '" + text + "'");
}

struct Entry {
  std::string value;
  int line = 0;
};

// Applies one key to a KernelSettings whose keys live under `prefix`.
inline bool apply_kernel_key(KernelSettings& k, const std::string& prefix, const std::string& key,
                             const Entry& e) {
  if (key == prefix) {
    static const std::set<std::string> types{"geometric", "power_law", "table", "zero"};
    if (!types.count(e.value)) {
      throw ConfigError(e.line, key, "unknown kernel type '" + e.value + "'");
    }
    k.type = e.value;
    return true;
  }
  if (key == prefix + ".weight") return k.weight = parse_number<double>(e.value, e.line, key), true;
  if (key == prefix + ".ratio") return k.ratio = parse_number<double>(e.value, e.line, key), true;
  if (key == prefix + ".scale") return k.scale = parse_number<double>(e.value, e.line, key), true;
  if (key == prefix + ".exponent") {
    return k.exponent = parse_number<double>(e.value, e.line, key), true;
  }
  if (key == prefix + ".values") {
    std::vector<double> v;
    for (const auto& item : split_list(e.value)) v.push_back(parse_number<double>(item, e.line, key));
    k.values = std::move(v);
    return true;
  }
  return false;
}

}  // namespace detail

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parses `key = value` lines. `[section]` headers prefix following keys
/// with "section."; '#' starts a comment. Keys apply over the defaults of
/// RunConfig; unknown or repeated keys are errors. `overrides` replace file
/// values and are reported with line 0.
inline RunConfig parse_run_config(std::istream& in, const ConfigOverrides& overrides = {}) {
  std::map<std::string, detail::Entry> entries;
  std::vector<std::string> order;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "", "empty key");
    if (!section.empty()) key = section + "." + key;
    if (entries.count(key)) {
      throw ConfigError(line_no, key, "repeated key (first set on line " +
                                          std::to_string(entries[key].line) + ")");
    }
    entries[key] = {value, line_no};
    order.push_back(key);
  }
  for (const auto& [key, value] : overrides) {
    if (!entries.count(key)) order.push_back(key);
    entries[key] = {detail::trim(value), 0};
  }

  RunConfig cfg;
  // A kernel or marks type line resets the family's parameters, so the
  // defaults of one family never leak into another.
  if (auto it = entries.find("model.kernel"); it != entries.end()) cfg.model.kernel = {};
  if (auto it = entries.find("seol.kernel"); it != entries.end()) cfg.seol.kernel = {};
  if (entries.count("model.marks")) {
    cfg.model.marks_rate.reset();
    cfg.model.marks_value.reset();
    cfg.model.marks_atoms.reset();
  }

  for (const auto& key : order) {
    const detail::Entry& e = entries[key];
    const int ln = e.line;
    using detail::parse_number;
    if (key == "model.nu") {
      cfg.model.nu = parse_number<double>(e.value, ln, key);
    } else if (detail::apply_kernel_key(cfg.model.kernel, "model.kernel", key, e)) {
    } else if (key == "model.marks") {
      if (e.value != "constant" && e.value != "exponential" && e.value != "discrete") {
        throw ConfigError(ln, key, "unknown marks type '" + e.value + "'");
      }
      cfg.model.marks_type = e.value;
    } else if (key == "model.marks.value") {
      cfg.model.marks_value = parse_number<double>(e.value, ln, key);
    } else if (key == "model.marks.rate") {
      cfg.model.marks_rate = parse_number<double>(e.value, ln, key);
    } else if (key == "model.marks.atoms") {
      std::vector<MarkAtom> atoms;
      for (const auto& item : detail::split_list(e.value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          throw ConfigError(ln, key, "atoms are written value:probability");
        }
        atoms.push_back({parse_number<double>(detail::trim(item.substr(0, colon)), ln, key),
                         parse_number<double>(detail::trim(item.substr(colon + 1)), ln, key)});
      }
      cfg.model.marks_atoms = std::move(atoms);
    } else if (key == "simulation.horizon") {
      cfg.simulation.horizon = parse_number<std::int64_t>(e.value, ln, key);
    } else if (key == "simulation.n_paths") {
      cfg.simulation.n_paths = parse_number<std::int64_t>(e.value, ln, key);
    } else if (key == "simulation.master_seed") {
      cfg.simulation.master_seed = parse_number<std::uint64_t>(e.value, ln, key);
    } else if (key == "simulation.record_mode") {
      if (e.value == "terminal_only") {
        cfg.simulation.record_mode = RecordMode::kTerminalOnly;
      } else if (e.value == "full_series") {
        cfg.simulation.record_mode = RecordMode::kFullSeries;
      } else {
        throw ConfigError(ln, key, "expected terminal_only or full_series");
      }
    } else if (key == "simulation.truncation") {
      if (e.value == "none") {
        cfg.simulation.truncation.reset();
      } else {
        cfg.simulation.truncation = parse_number<std::int64_t>(e.value, ln, key);
      }
    } else if (key == "simulation.workers") {
      cfg.simulation.workers = parse_number<unsigned>(e.value, ln, key);
    } else if (key == "verification.significance") {
      cfg.verification.significance = parse_number<double>(e.value, ln, key);
    } else if (key == "verification.bins") {
      cfg.verification.bins = parse_number<int>(e.value, ln, key);
    } else if (key == "verification.checks") {
      cfg.verification.checks = detail::split_list(e.value);
      for (const auto& c : cfg.verification.checks) {
        if (!known_checks().count(c)) throw ConfigError(ln, key, "unknown check '" + c + "'");
      }
    } else if (key == "verification.sigma2_n_override") {
      cfg.verification.sigma2_N_override = parse_number<double>(e.value, ln, key);
    } else if (key == "verification.sigma2_l_override") {
      cfg.verification.sigma2_L_override = parse_number<double>(e.value, ln, key);
    } else if (key == "output.directory") {
      cfg.output.directory = e.value;
    } else if (key == "output.formats") {
      cfg.output.csv = cfg.output.json = false;
      for (const auto& f : detail::split_list(e.value)) {
        if (f == "csv") {
          cfg.output.csv = true;
        } else if (f == "json") {
          cfg.output.json = true;
        } else {
          throw ConfigError(ln, key, "unknown format '" + f + "'");
        }
      }
    } else if (key == "output.timestamp") {
      cfg.output.timestamp = detail::parse_bool(e.value, ln, key);
    } else if (key == "seol.alpha0") {
      cfg.seol.alpha0 = parse_number<double>(e.value, ln, key);
    } else if (detail::apply_kernel_key(cfg.seol.kernel, "seol.kernel", key, e)) {
    } else if (key == "oracle.horizon") {
      cfg.oracle.horizon = parse_number<std::int64_t>(e.value, ln, key);
    } else if (key == "oracle.z_cap") {
      cfg.oracle.z_cap = parse_number<int>(e.value, ln, key);
    } else if (key == "oracle.n_mc") {
      cfg.oracle.n_mc = parse_number<std::uint64_t>(e.value, ln, key);
    } else {
      throw ConfigError(ln, key, "unknown key");
    }
  }

  // Range checks that do not need a model.
  auto line_of = [&](const std::string& k) {
    const auto it = entries.find(k);
    return it == entries.end() ? 0 : it->second.line;
  };
  if (cfg.simulation.horizon < 1) {
    throw ConfigError(line_of("simulation.horizon"), "simulation.horizon", "must be >= 1");
  }
  if (cfg.simulation.n_paths < 1) {
    throw ConfigError(line_of("simulation.n_paths"), "simulation.n_paths", "must be >= 1");
  }
  if (cfg.simulation.truncation && *cfg.simulation.truncation < 1) {
    throw ConfigError(line_of("simulation.truncation"), "simulation.truncation", "must be >= 1");
  }
  if (!(cfg.verification.significance > 0.0 && cfg.verification.significance < 1.0)) {
    throw ConfigError(line_of("verification.significance"), "verification.significance",
                      "must lie in (0, 1)");
  }
  if (cfg.verification.bins < 2) {
    throw ConfigError(line_of("verification.bins"), "verification.bins", "must be >= 2");
  }
  return cfg;
}

inline RunConfig parse_run_config(const std::string& text, const ConfigOverrides& overrides = {}) {
  std::istringstream in(text);
  return parse_run_config(in, overrides);
}

inline RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open '" + path + "'");
  return parse_run_config(in, overrides);
}

/// Builds a kernel; parameter mismatches are reported against `prefix`.
inline ExcitationKernel build_kernel(const KernelSettings& k, const std::string& prefix) {
  auto require = [&](const std::optional<double>& v, const char* name) {
    if (!v) throw ConfigError(0, prefix + "." + name, "required for " + k.type + " kernels");
    return *v;
  };
  auto forbid = [&](bool present, const char* name) {
    if (present) throw ConfigError(0, prefix + "." + name, "not used by " + k.type + " kernels");
  };
  try {
    if (k.type == "geometric") {
      forbid(k.scale.has_value(), "scale");
      forbid(k.exponent.has_value(), "exponent");
      forbid(k.values.has_value(), "values");
      return ExcitationKernel::geometric(require(k.weight, "weight"), require(k.ratio, "ratio"));
    }
    if (k.type == "power_law") {
      forbid(k.weight.has_value(), "weight");
      forbid(k.ratio.has_value(), "ratio");
      forbid(k.values.has_value(), "values");
      return ExcitationKernel::power_law(require(k.scale, "scale"), require(k.exponent, "exponent"));
    }
    forbid(k.weight.has_value(), "weight");
    forbid(k.ratio.has_value(), "ratio");
    forbid(k.scale.has_value(), "scale");
    forbid(k.exponent.has_value(), "exponent");
    if (k.type == "zero") {
      forbid(k.values.has_value(), "values");
      return ExcitationKernel::zero();
    }
    if (!k.values) throw ConfigError(0, prefix + ".values", "required for table kernels");
    return ExcitationKernel::table(*k.values);
  } catch (const InvalidParameter& e) {
    throw ConfigError(0, prefix, e.what());
  }
}

inline MarkDistribution build_marks(const RunConfig::Model& m) {
  auto forbid = [&](bool present, const char* name) {
    if (present) {
      throw ConfigError(0, std::string("model.marks.") + name, "not used by " + m.marks_type + " marks");
    }
  };
  try {
    if (m.marks_type == "constant") {
      forbid(m.marks_rate.has_value(), "rate");
      forbid(m.marks_atoms.has_value(), "atoms");
      if (!m.marks_value) throw ConfigError(0, "model.marks.value", "required for constant marks");
      return MarkDistribution::constant(*m.marks_value);
    }
    if (m.marks_type == "exponential") {
      forbid(m.marks_value.has_value(), "value");
      forbid(m.marks_atoms.has_value(), "atoms");
      if (!m.marks_rate) throw ConfigError(0, "model.marks.rate", "required for exponential marks");
      return MarkDistribution::exponential(*m.marks_rate);
    }
    forbid(m.marks_value.has_value(), "value");
    forbid(m.marks_rate.has_value(), "rate");
    if (!m.marks_atoms) throw ConfigError(0, "model.marks.atoms", "required for discrete marks");
    return MarkDistribution::discrete(*m.marks_atoms);
  } catch (const InvalidParameter& e) {
    throw ConfigError(0, "model.marks", e.what());
  }
}

/// Model parameters; throws ConfigError for malformed settings and
/// UnstableModel when rho >= 1.
inline ModelParams build_model(const RunConfig& cfg) {
  if (!(cfg.model.nu >= 0.0) || !std::isfinite(cfg.model.nu)) {
    throw ConfigError(0, "model.nu", "must be finite and >= 0");
  }
  return make_params(cfg.model.nu, build_kernel(cfg.model.kernel, "model.kernel"),
                     build_marks(cfg.model));
}

inline SimulationConfig build_simulation(const RunConfig& cfg) {
  SimulationConfig s;
  s.horizon = cfg.simulation.horizon;
  s.n_paths = cfg.simulation.n_paths;
  s.master_seed = cfg.simulation.master_seed;
  s.record_mode = cfg.simulation.record_mode;
  s.truncation = cfg.simulation.truncation;
  s.workers = cfg.simulation.workers;
  try {
    validate(s);
  } catch (const InvalidParameter& e) {
    throw ConfigError(0, "simulation", e.what());
  }
  return s;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void dump_kernel(std::map<std::string, std::string>& kv, const std::string& prefix,
                        const KernelSettings& k) {
  kv[prefix] = k.type;
  if (k.weight) kv[prefix + ".weight"] = format_double(*k.weight);
  if (k.ratio) kv[prefix + ".ratio"] = format_double(*k.ratio);
  if (k.scale) kv[prefix + ".scale"] = format_double(*k.scale);
  if (k.exponent) kv[prefix + ".exponent"] = format_double(*k.exponent);
  if (k.values) {
    std::string s;
    for (double v : *k.values) s += (s.empty() ? "" : ",") + format_double(v);
    kv[prefix + ".values"] = s;
  }
}

}  // namespace detail

/// Effective configuration as sorted `key = value` lines. Everything that
/// changes results is included; worker count, output location and the
/// timestamp switch are not.
inline std::string canonical_config(const RunConfig& cfg) {
  using detail::format_double;
  std::map<std::string, std::string> kv;
  kv["model.nu"] = format_double(cfg.model.nu);
  detail::dump_kernel(kv, "model.kernel", cfg.model.kernel);
  kv["model.marks"] = cfg.model.marks_type;
  if (cfg.model.marks_value) kv["model.marks.value"] = format_double(*cfg.model.marks_value);
  if (cfg.model.marks_rate) kv["model.marks.rate"] = format_double(*cfg.model.marks_rate);
  if (cfg.model.marks_atoms) {
    std::string s;
    for (const auto& a : *cfg.model.marks_atoms) {
      s += (s.empty() ? "" : ",") + format_double(a.value) + ":" + format_double(a.probability);
    }
    kv["model.marks.atoms"] = s;
  }
  kv["simulation.horizon"] = std::to_string(cfg.simulation.horizon);
  kv["simulation.n_paths"] = std::to_string(cfg.simulation.n_paths);
  kv["simulation.master_seed"] = std::to_string(cfg.simulation.master_seed);
  kv["simulation.record_mode"] =
      cfg.simulation.record_mode == RecordMode::kFullSeries ? "full_series" : "terminal_only";
  kv["simulation.truncation"] =
      cfg.simulation.truncation ? std::to_string(*cfg.simulation.truncation) : "none";
  kv["verification.significance"] = format_double(cfg.verification.significance);
  kv["verification.bins"] = std::to_string(cfg.verification.bins);
  std::string checks;
  for (const auto& c : cfg.verification.checks) checks += (checks.empty() ? "" : ",") + c;
  kv["verification.checks"] = checks;
  if (cfg.verification.sigma2_N_override) {
    kv["verification.sigma2_n_override"] = format_double(*cfg.verification.sigma2_N_override);
  }
  if (cfg.verification.sigma2_L_override) {
    kv["verification.sigma2_l_override"] = format_double(*cfg.verification.sigma2_L_override);
  }
  kv["seol.alpha0"] = format_double(cfg.seol.alpha0);
  detail::dump_kernel(kv, "seol.kernel", cfg.seol.kernel);
  kv["oracle.horizon"] = std::to_string(cfg.oracle.horizon);
  kv["oracle.z_cap"] = std::to_string(cfg.oracle.z_cap);
  kv["oracle.n_mc"] = std::to_string(cfg.oracle.n_mc);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

/// FNV-1a 64 of canonical_config, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dthawkes
