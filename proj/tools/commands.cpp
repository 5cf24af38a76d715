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
#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "CLI11.hpp"
#include "dthawkes.hpp"
#include "json.hpp"

namespace dthawkes::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// A precondition of the model itself failed (exit code 3).
class ModelAssumptionError : public Error {
 public:
  using Error::Error;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// NaN and infinities have no JSON form; they are written as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError(0, "output.directory", "cannot create '" + dir.string() + "': " + ec.message());
  }
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(0, "output.directory", "cannot write '" + path.string() + "'");
  return f;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : file_(open_output(path)) {
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) file_ << ',';
      file_ << cells[i];
    }
    file_ << '\n';
  }

 private:
  std::ofstream file_;
};

std::string integer(std::uint64_t v) { return std::to_string(v); }

// Verdict document plus command-specific details.
struct Verdict {
  std::string command;
  std::vector<Check> checks;
  Json details = Json::object();
  std::vector<std::string> warnings;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  void add(std::string name, double statistic, double threshold, bool ok) {
    checks.push_back({std::move(name), statistic, threshold, ok});
  }
};

int finish(const RunConfig& cfg, const Verdict& v, std::ostream& out) {
  for (const auto& c : v.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": statistic=" << format_real(c.statistic)
        << " threshold=" << format_real(c.threshold) << '\n';
  }
  for (const auto& w : v.warnings) out << "warning: " << w << '\n';
  out << (v.pass() ? "PASS" : "FAIL") << ' ' << v.command << '\n';

  if (cfg.output.json) {
    Json doc;
    doc["command"] = v.command;
    doc["config_hash"] = config_hash(cfg);
    Json checks = Json::array();
    for (const auto& c : v.checks) {
      checks.push_back({{"name", c.name},
                        {"statistic", number(c.statistic)},
                        {"threshold", number(c.threshold)},
                        {"pass", c.pass}});
    }
    doc["checks"] = checks;
    doc["pass"] = v.pass();
    if (cfg.output.timestamp) doc["timestamp"] = utc_timestamp();
    if (!v.warnings.empty()) doc["warnings"] = v.warnings;
    if (!v.details.empty()) doc["details"] = v.details;
    auto f = open_output(prepare_output(cfg) / (v.command + ".json"));
    f << doc.dump(2) << '\n';
  }
  return v.pass() ? kExitPass : kExitVerificationFailure;
}

Json limits_json(const TheoreticalLimits& l) {
  return {{"mu_N", number(l.mu_N)},
          {"mu_L", number(l.mu_L)},
          {"sigma2_N", number(l.sigma2_N)},
          {"sigma2_L", number(l.sigma2_L)},
          {"mean_bound_Z", number(l.mean_bound_Z)},
          {"mean_bound_X", number(l.mean_bound_X)},
          {"lambda_m2_bound", number(l.lambda_m2_bound)}};
}

// Grid {T/8, T/4, T/2, T} restricted to entries >= 2.
std::vector<std::int64_t> tail_grid(std::int64_t horizon) {
  std::vector<std::int64_t> grid;
  for (std::int64_t d : {8, 4, 2, 1}) {
    const std::int64_t t = horizon / d;
    if (t >= 2 && (grid.empty() || t > grid.back())) grid.push_back(t);
  }
  if (grid.empty()) grid.push_back(2);
  return grid;
}

// Per-path aggregates for verify and figure.
struct PathTotals {
  std::uint64_t n = 0;
  double l = 0.0;
  double sum_lambda = 0.0;
  double d4_n = 0.0;
  double predicted_n = 0.0;
  double d4_l = 0.0;
  double predicted_l = 0.0;
  bool truncated = false;
};

std::vector<PathTotals> run_totals(const ModelParams& params, const SimulationConfig& sim,
                                   const std::optional<IncrementMomentConstants>& constants) {
  std::vector<PathTotals> totals(static_cast<std::size_t>(sim.n_paths));
  detail::parallel_for(totals.size(), sim.workers, [&](std::uint64_t i) {
    PathTotals& t = totals[i];
    detail::CompensatedSum l;
    detail::CompensatedSum lam;
    std::optional<LindebergAccumulator> acc_n;
    std::optional<LindebergAccumulator> acc_l;
    if (constants) {
      acc_n.emplace(params, *constants, IncrementTarget::kCounts);
      acc_l.emplace(params, *constants, IncrementTarget::kMarks);
    }
    t.truncated = simulate_path_steps(params, sim, i, [&](const StepRecord& s) {
      t.n += s.count;
      l.add(s.mark_total);
      lam.add(s.lambda);
      if (acc_n) {
        acc_n->add(s);
        acc_l->add(s);
      }
    });
    t.l = l.value();
    t.sum_lambda = lam.value();
    if (acc_n) {
      t.d4_n = acc_n->empirical_mean();
      t.predicted_n = acc_n->predicted_mean();
      t.d4_l = acc_l->empirical_mean();
      t.predicted_l = acc_l->predicted_mean();
    }
  });
  return totals;
}

void add_truncation_warning(Verdict& v, const std::vector<PathTotals>& totals) {
  if (std::any_of(totals.begin(), totals.end(), [](const PathTotals& t) { return t.truncated; })) {
    v.warnings.push_back("truncation window dropped kernel mass above 1e-12; results are approximate");
  }
}

void add_ks_check(Verdict& v, const std::string& name, std::span<const double> samples, double variance,
                  double significance) {
  const GofReport r = ks_test_normal(samples, variance, significance);
  v.add(name, r.statistic, ks_critical_value(r.n, significance), r.passed);
  v.details[name] = {{"p_value", number(r.p_value)}, {"target_variance", number(variance)}, {"n", r.n}};
}

std::vector<double> normalized(const std::vector<PathTotals>& totals, std::int64_t horizon, double mu,
                               bool marks) {
  const double t = static_cast<double>(horizon);
  std::vector<double> out;
  out.reserve(totals.size());
  for (const auto& p : totals) {
    const double x = marks ? p.l : static_cast<double>(p.n);
    out.push_back((x - mu * t) / std::sqrt(t));
  }
  return out;
}

void write_histogram(const fs::path& path, std::span<const HistogramBin> bins) {
  CsvWriter csv(path, {"bin_left", "bin_right", "count", "density"});
  for (const auto& b : bins) {
    csv.row({format_real(b.left), format_real(b.right), integer(b.count), format_real(b.density)});
  }
}

ExcitationKernel seol_kernel(const RunConfig& cfg) { return build_kernel(cfg.seol.kernel, "seol.kernel"); }

SeolModel build_seol(const RunConfig& cfg) {
  ExcitationKernel kernel = seol_kernel(cfg);
  try {
    return SeolModel(cfg.seol.alpha0, std::move(kernel));
  } catch (const InvalidParameter& e) {
    throw ModelAssumptionError(e.what());
  }
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double ks_critical_value(std::size_t n, double significance) {
  double lo = 0.0;
  double hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_survival(mid) > significance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi / std::sqrt(static_cast<double>(n));
}

RunConfig resolve_config(const Options& options) {
  RunConfig cfg = options.config_path ? load_run_config(*options.config_path, options.sets)
                                      : parse_run_config(std::string(), options.sets);
  if (options.seed) cfg.simulation.master_seed = *options.seed;
  if (options.workers) cfg.simulation.workers = *options.workers;
  if (options.out_dir) cfg.output.directory = *options.out_dir;
  if (options.no_timestamp) cfg.output.timestamp = false;
  if (options.significance) {
    if (!(*options.significance > 0.0 && *options.significance < 1.0)) {
      throw ConfigError(0, "--significance", "must lie in (0, 1)");
    }
    cfg.verification.significance = *options.significance;
  }
  if (options.sigma2_n) cfg.verification.sigma2_N_override = *options.sigma2_n;
  if (options.sigma2_l) cfg.verification.sigma2_L_override = *options.sigma2_l;
  return cfg;
}

int cmd_limits(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = build_model(cfg);
  const double rho = check_stability(params);
  const TheoreticalLimits l = theoretical_limits(params);
  Verdict v{"limits", {}, {}, {}};
  v.add("stability", rho, 1.0, rho < 1.0);

  // Mean bound certificate over the configured horizon.
  const auto moments = exact_moment_recursion(params, cfg.simulation.horizon);
  double max_z = 0.0;
  double max_x = 0.0;
  for (const auto& m : moments) {
    max_z = std::max(max_z, m.mean_Z);
    max_x = std::max(max_x, m.mean_X);
  }
  v.add("mean_bound_Z", max_z, l.mean_bound_Z, max_z <= l.mean_bound_Z * (1.0 + 1e-12));
  v.add("mean_bound_X", max_x, l.mean_bound_X, max_x <= l.mean_bound_X * (1.0 + 1e-12));

  const auto grid = tail_grid(cfg.simulation.horizon);
  const TailConditionReport tail = check_clt_tail_condition(params.kernel, grid);

  v.details["branching_ratio"] = number(rho);
  v.details["limits"] = limits_json(l);
  try {
    const IncrementMomentConstants c = increment_moment_constants(params);
    v.details["increment_constants"] = {
        {"c1_N", number(c.c1_N)}, {"c2_N", number(c.c2_N)}, {"c1_L", number(c.c1_L)}, {"c2_L", number(c.c2_L)}};
  } catch (const MissingMoment&) {
    v.warnings.push_back("mark law lacks a finite fourth moment; increment constants omitted");
  }
  Json tail_points = Json::array();
  for (const auto& p : tail.points) tail_points.push_back({{"t", p.t}, {"value", number(p.value)}});
  v.details["tail_condition"] = {{"points", tail_points}, {"holds", tail.holds}, {"analytic", tail.analytic}};

  out << "model: nu=" << format_real(params.nu) << " kernel=" << params.kernel.describe()
      << " marks=" << params.marks.describe() << '\n';
  out << "branching_ratio  " << format_real(rho) << '\n';
  out << "mu_N             " << format_real(l.mu_N) << '\n';
  out << "mu_L             " << format_real(l.mu_L) << '\n';
  out << "sigma2_N         " << format_real(l.sigma2_N) << '\n';
  out << "sigma2_L         " << format_real(l.sigma2_L) << '\n';
  out << "mean_bound_Z     " << format_real(l.mean_bound_Z) << "  (max E[Z_t], t<=T: " << format_real(max_z) << ")\n";
  out << "mean_bound_X     " << format_real(l.mean_bound_X) << "  (max E[X_t], t<=T: " << format_real(max_x) << ")\n";
  out << "lambda_m2_bound  " << format_real(l.lambda_m2_bound) << '\n';
  return finish(cfg, v, out);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = build_model(cfg);
  const SimulationConfig sim = build_simulation(cfg);
  const fs::path dir = prepare_output(cfg);
  const bool series = sim.record_mode == RecordMode::kFullSeries;
  if (series && cfg.output.csv) fs::create_directories(dir / "series");

  Verdict v{"simulate", {}, {}, {}};
  std::optional<CsvWriter> terminal;
  if (cfg.output.csv) terminal.emplace(dir / "terminal.csv", std::vector<std::string>{"path", "N_T", "L_T", "sum_lambda"});

  // Chunks bound memory for full-series runs; output order is path order.
  constexpr std::uint64_t kChunk = 256;
  const auto n_paths = static_cast<std::uint64_t>(sim.n_paths);
  bool truncated = false;
  detail::CompensatedSum n_sum;
  detail::CompensatedSum l_sum;
  for (std::uint64_t first = 0; first < n_paths; first += kChunk) {
    const auto paths = simulate_ensemble(params, sim, first, std::min(kChunk, n_paths - first));
    for (const auto& p : paths) {
      truncated = truncated || p.truncation_exceeded;
      n_sum.add(static_cast<double>(p.terminal_N));
      l_sum.add(p.terminal_L);
      if (!terminal) continue;
      terminal->row({integer(p.path_index), integer(p.terminal_N), format_real(p.terminal_L),
                     format_real(p.sum_lambda.value_or(std::nan("")))});
      if (series) {
        char name[48];
        std::snprintf(name, sizeof name, "path_%06llu.csv", static_cast<unsigned long long>(p.path_index));
        CsvWriter csv(dir / "series" / name, {"t", "lambda", "Z", "X", "N_cum", "L_cum"});
        std::uint64_t n_cum = 0;
        double l_cum = 0.0;
        for (std::size_t t = 0; t < p.lambda.size(); ++t) {
          n_cum += p.counts[t];
          l_cum += p.marks[t];
          csv.row({integer(t + 1), format_real(p.lambda[t]), integer(p.counts[t]), format_real(p.marks[t]),
                   integer(n_cum), format_real(l_cum)});
        }
      }
    }
  }
  if (truncated) v.warnings.push_back("truncation window dropped kernel mass above 1e-12; results are approximate");
  const double t = static_cast<double>(sim.horizon);
  v.details["n_paths"] = sim.n_paths;
  v.details["horizon"] = sim.horizon;
  v.details["mean_N_over_t"] = number(n_sum.value() / static_cast<double>(n_paths) / t);
  v.details["mean_L_over_t"] = number(l_sum.value() / static_cast<double>(n_paths) / t);
  v.details["truncation_exceeded"] = truncated;
  out << "simulated " << sim.n_paths << " paths of " << sim.horizon << " steps into " << dir.string() << '\n';
  return finish(cfg, v, out);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = build_model(cfg);
  SimulationConfig sim = build_simulation(cfg);
  sim.record_mode = RecordMode::kTerminalOnly;
  const TheoreticalLimits lim = theoretical_limits(params);
  const auto& selected = cfg.verification.checks;
  auto wants = [&](const char* name) { return std::find(selected.begin(), selected.end(), name) != selected.end(); };

  std::optional<IncrementMomentConstants> constants;
  if (wants("lindeberg")) constants = increment_moment_constants(params);
  const auto totals = run_totals(params, sim, constants);
  const double n = static_cast<double>(totals.size());
  const double horizon = static_cast<double>(sim.horizon);
  const double sig = cfg.verification.significance;

  Verdict v{"verify", {}, {}, {}};
  add_truncation_warning(v, totals);
  v.details["limits"] = limits_json(lim);

  if (wants("lln")) {
    std::vector<double> rn;
    std::vector<double> rl;
    for (const auto& p : totals) {
      rn.push_back(static_cast<double>(p.n) / horizon);
      rl.push_back(p.l / horizon);
    }
    const SampleStats sn = describe(rn);
    const SampleStats sl = describe(rl);
    const double tn = std::max(0.01 * lim.mu_N, 4.0 * sn.standard_error());
    const double tl = std::max(0.01 * lim.mu_L, 4.0 * sl.standard_error());
    v.add("lln_n", std::fabs(sn.mean - lim.mu_N), tn, std::fabs(sn.mean - lim.mu_N) <= tn);
    v.add("lln_l", std::fabs(sl.mean - lim.mu_L), tl, std::fabs(sl.mean - lim.mu_L) <= tl);
    v.details["mean_N_over_t"] = number(sn.mean);
    v.details["mean_L_over_t"] = number(sl.mean);
  }
  if (wants("clt_n")) {
    const double var = cfg.verification.sigma2_N_override.value_or(lim.sigma2_N);
    add_ks_check(v, "clt_n", normalized(totals, sim.horizon, lim.mu_N, false), var, sig);
  }
  if (wants("clt_l")) {
    const double var = cfg.verification.sigma2_L_override.value_or(lim.sigma2_L);
    add_ks_check(v, "clt_l", normalized(totals, sim.horizon, lim.mu_L, true), var, sig);
  }
  if (wants("martingale")) {
    if (totals.size() < 2) throw ConfigError(0, "simulation.n_paths", "martingale check needs >= 2 paths");
    std::vector<double> residual;
    std::vector<double> sums;
    for (const auto& p : totals) {
      residual.push_back(static_cast<double>(p.n) - p.sum_lambda);
      sums.push_back(p.sum_lambda);
    }
    const SampleStats r = describe(residual);
    const SampleStats s = describe(sums);
    const double mean_threshold = 4.0 * std::sqrt(s.mean / n);
    v.add("martingale_mean", std::fabs(r.mean), mean_threshold, std::fabs(r.mean) <= mean_threshold);
    const double ratio = s.mean > 0.0 ? r.variance / s.mean : std::nan("");
    const double ratio_threshold = std::max(0.05, 4.0 * std::sqrt(2.0 / (n - 1.0)));
    v.add("martingale_variance", std::fabs(ratio - 1.0), ratio_threshold, std::fabs(ratio - 1.0) <= ratio_threshold);
    v.details["martingale_variance_ratio"] = number(ratio);
  }
  if (wants("lindeberg")) {
    detail::CompensatedSum en;
    detail::CompensatedSum pn;
    detail::CompensatedSum el;
    detail::CompensatedSum pl;
    for (const auto& p : totals) {
      en.add(p.d4_n);
      pn.add(p.predicted_n);
      el.add(p.d4_l);
      pl.add(p.predicted_l);
    }
    const double ratio_n = en.value() / pn.value();
    const double ratio_l = el.value() / pl.value();
    v.add("lindeberg_n", std::fabs(ratio_n - 1.0), 0.1, std::fabs(ratio_n - 1.0) <= 0.1);
    v.add("lindeberg_l", std::fabs(ratio_l - 1.0), 0.1, std::fabs(ratio_l - 1.0) <= 0.1);
    v.details["lindeberg_ratio_n"] = number(ratio_n);
    v.details["lindeberg_ratio_l"] = number(ratio_l);
  }
  if (wants("tail")) {
    const TailConditionReport tail = check_clt_tail_condition(params.kernel, tail_grid(sim.horizon));
    v.add("tail", tail.points.back().value, tail.points.front().value, tail.holds);
  }
  out << "verified " << sim.n_paths << " paths of " << sim.horizon << " steps\n";
  return finish(cfg, v, out);
}

int cmd_figure(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = build_model(cfg);
  SimulationConfig sim = build_simulation(cfg);
  sim.record_mode = RecordMode::kTerminalOnly;
  const TheoreticalLimits lim = theoretical_limits(params);
  const auto totals = run_totals(params, sim, std::nullopt);
  const double var_n = cfg.verification.sigma2_N_override.value_or(lim.sigma2_N);
  const double var_l = cfg.verification.sigma2_L_override.value_or(lim.sigma2_L);
  const double sig = cfg.verification.significance;

  Verdict v{"figure", {}, {}, {}};
  add_truncation_warning(v, totals);
  const fs::path dir = prepare_output(cfg);
  for (const bool marks : {false, true}) {
    const auto xs = normalized(totals, sim.horizon, marks ? lim.mu_L : lim.mu_N, marks);
    const double var = marks ? var_l : var_n;
    const auto bins = histogram(xs, cfg.verification.bins, var);
    const ChiSquareReport chi = histogram_chi_square(bins);
    const std::string name = marks ? "chi2_l" : "chi2_n";
    const double critical = chi.degrees_of_freedom > 0
                                ? 2.0 * boost::math::gamma_q_inv(0.5 * chi.degrees_of_freedom, sig)
                                : std::numeric_limits<double>::infinity();
    v.add(name, chi.statistic, critical, chi.p_value >= sig);
    v.details[name] = {{"p_value", number(chi.p_value)},
                       {"degrees_of_freedom", chi.degrees_of_freedom},
                       {"overlay_variance", number(var)}};
    if (cfg.output.csv) write_histogram(dir / (marks ? "figure_L.csv" : "figure_N.csv"), bins);
  }
  out << "histograms of " << sim.n_paths << " normalized statistics written to " << dir.string() << '\n';
  return finish(cfg, v, out);
}

int cmd_seol(const RunConfig& cfg, std::ostream& out) {
  const SeolModel model = build_seol(cfg);
  const SeolLimits lim = seol_limits(model);
  const std::int64_t horizon = cfg.simulation.horizon;
  const auto totals = simulate_seol_ensemble(model, horizon, cfg.simulation.n_paths,
                                             cfg.simulation.master_seed, cfg.simulation.workers);
  const double t = static_cast<double>(horizon);
  std::vector<double> rate;
  std::vector<double> z;
  for (auto s : totals) {
    rate.push_back(static_cast<double>(s) / t);
    z.push_back((static_cast<double>(s) - lim.mu * t) / std::sqrt(t));
  }
  const SampleStats st = describe(rate);
  Verdict v{"seol", {}, {}, {}};
  const double threshold = 4.0 * st.standard_error();
  v.add("seol_lln", std::fabs(st.mean - lim.mu), threshold, std::fabs(st.mean - lim.mu) <= threshold);
  add_ks_check(v, "seol_clt", z, lim.variance, cfg.verification.significance);
  v.details["mu"] = number(lim.mu);
  v.details["variance"] = number(lim.variance);
  v.details["mean_S_over_n"] = number(st.mean);

  if (cfg.output.csv) {
    CsvWriter csv(prepare_output(cfg) / "seol_terminal.csv", {"path", "S_T"});
    for (std::size_t i = 0; i < totals.size(); ++i) csv.row({integer(i), integer(totals[i])});
  }
  out << "mu               " << format_real(lim.mu) << '\n';
  out << "clt_variance     " << format_real(lim.variance) << '\n';
  out << "mean S_n/n       " << format_real(st.mean) << '\n';
  return finish(cfg, v, out);
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = build_model(cfg);
  if (!params.marks.is_discrete()) {
    throw ConfigError(0, "model.marks", "oracle needs constant or discrete marks");
  }
  if (cfg.oracle.horizon < 1 || cfg.oracle.horizon > kOracleMaxHorizon) {
    throw ConfigError(0, "oracle.horizon", "must lie in [1, 4]");
  }
  if (cfg.oracle.z_cap < 0 || cfg.oracle.z_cap > kOracleMaxZCap) {
    throw ConfigError(0, "oracle.z_cap", "must lie in [0, 12]");
  }
  if (cfg.oracle.n_mc < 1) throw ConfigError(0, "oracle.n_mc", "must be >= 1");
  CrosscheckReport r;
  try {
    r = oracle_crosscheck(params, cfg.oracle.horizon, cfg.oracle.z_cap, cfg.oracle.n_mc,
                          cfg.simulation.master_seed, cfg.simulation.workers);
  } catch (const TruncationTooCoarse& e) {
    throw ConfigError(0, "oracle.z_cap", e.what());
  }
  const auto rec = exact_moment_recursion(params, cfg.oracle.horizon);
  double mean_n = 0.0;
  for (const auto& m : rec) mean_n += m.mean_Z;
  const double gap = std::fabs(r.exact.counts.mean() - mean_n);
  const double gap_threshold = 1e-9 + r.exact.counts.truncation_mass * cfg.oracle.z_cap *
                                          static_cast<double>(cfg.oracle.horizon);

  Verdict v{"oracle", {}, {}, {}};
  v.add("oracle_tv", r.tv_distance, r.threshold, r.passed);
  v.add("oracle_mean", gap, gap_threshold, gap <= gap_threshold);
  v.details["exact_mean_N"] = number(r.exact_mean);
  v.details["empirical_mean_N"] = number(r.empirical_mean);
  v.details["recursion_mean_N"] = number(mean_n);
  v.details["truncation_mass"] = number(r.exact.counts.truncation_mass);
  v.details["support_size"] = r.support_size;

  if (cfg.output.csv) {
    std::map<double, double> empirical(r.empirical.support.begin(), r.empirical.support.end());
    CsvWriter csv(prepare_output(cfg) / "oracle_law.csv", {"N_T", "exact_probability", "empirical_probability"});
    for (const auto& [value, p] : r.exact.counts.support) {
      const auto it = empirical.find(value);
      csv.row({integer(static_cast<std::uint64_t>(value)), format_real(p),
               format_real(it == empirical.end() ? 0.0 : it->second)});
    }
  }
  out << "exact E[N_T]     " << format_real(r.exact_mean) << '\n';
  out << "empirical E[N_T] " << format_real(r.empirical_mean) << '\n';
  out << "recursion E[N_T] " << format_real(mean_n) << '\n';
  return finish(cfg, v, out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-time marked Hawkes process toolkit"};
  app.require_subcommand(1);
  Options options;
  std::vector<std::string> sets;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "Configuration file (key = value)");
    sub->add_option("--set", sets, "Override one config key, e.g. --set simulation.horizon=500");
    sub->add_option("--seed", options.seed, "Master seed");
    sub->add_option("--workers", options.workers, "Worker threads (0: all cores)");
    sub->add_option("--out", options.out_dir, "Output directory");
    sub->add_flag("--no-timestamp", options.no_timestamp, "Omit the timestamp from JSON documents");
    sub->add_option("--significance", options.significance, "Significance level of the tests");
    sub->add_option("--sigma2-n", options.sigma2_n, "Replace the theoretical variance of N in KS and figure");
    sub->add_option("--sigma2-l", options.sigma2_l, "Replace the theoretical variance of L in KS and figure");
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Entry entries[] = {
      {"limits", "Print limits, variance constants and bound certificates", cmd_limits},
      {"simulate", "Simulate an ensemble and write terminal and series CSV", cmd_simulate},
      {"verify", "Run the selected law-of-large-numbers, CLT and martingale checks", cmd_verify},
      {"figure", "Write histogram and overlay density tables", cmd_figure},
      {"seol", "Simulate the 0-1 baseline and check its limits", cmd_seol},
      {"oracle", "Compare simulation with exact enumeration on a tiny model", cmd_oracle},
  };
  const Entry* chosen = nullptr;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    sub->callback([&chosen, &e] { chosen = &e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitConfigError;
  }

  try {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(0, s, "--set expects key=value");
      options.sets.emplace_back(detail::trim(s.substr(0, eq)), s.substr(eq + 1));
    }
    const RunConfig cfg = resolve_config(options);
    return chosen->fn(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const UnstableModel& e) {
    err << "error: " << e.what() << " (rho = " << format_real(e.branching_ratio()) << ")\n";
    return kExitModelAssumption;
  } catch (const ModelAssumptionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitModelAssumption;
  } catch (const MissingMoment& e) {
    err << "error: " << e.what() << '\n';
    return kExitModelAssumption;
  } catch (const ProbabilityOverflow& e) {
    err << "error: " << e.what() << '\n';
    return kExitModelAssumption;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace dthawkes::cli
