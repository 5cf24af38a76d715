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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dthawkes/config.hpp"

namespace dthawkes::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitVerificationFailure = 1,
  kExitConfigError = 2,
  kExitModelAssumption = 3,
};

/// Command-line state before it is merged with the config file.
struct Options {
  std::optional<std::string> config_path;
  ConfigOverrides sets;  // --set key=value, in order
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  bool no_timestamp = false;
  std::optional<double> significance;
  std::optional<double> sigma2_n;
  std::optional<double> sigma2_l;
};

/// Defaults, then the config file, then --set entries, then the dedicated
/// flags.
RunConfig resolve_config(const Options& options);

/// One line of a verdict document.
struct Check {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Each command writes its files under cfg.output.directory, prints a short
/// text report to `out` and returns an ExitCode. Library errors propagate;
/// run() maps them to exit codes.
int cmd_limits(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_figure(const RunConfig& cfg, std::ostream& out);
int cmd_seol(const RunConfig& cfg, std::ostream& out);
int cmd_oracle(const RunConfig& cfg, std::ostream& out);

/// Full command line entry point: parses argv, dispatches, maps errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Smallest D with P(sqrt(n) D_n > sqrt(n) D) <= significance under the
/// asymptotic Kolmogorov law.
double ks_critical_value(std::size_t n, double significance);

/// printf("%.17g").
std::string format_real(double value);

}  // namespace dthawkes::cli
