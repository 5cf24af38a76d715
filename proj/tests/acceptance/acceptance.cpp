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
// Acceptance criteria AC-1 .. AC-9. Usage: acceptance [AC-N ...]; with no
// argument every criterion runs. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "dthawkes.hpp"
#include "support/oracles.hpp"

namespace {

using namespace dthawkes;
namespace fs = std::filesystem;

// Pinned seeds and tolerances.
constexpr std::uint64_t kSeedAc1 = 1001;
constexpr std::uint64_t kSeedAc2 = 2002;
constexpr std::uint64_t kSeedAc3 = 3003;
constexpr std::uint64_t kSeedAc4 = 4004;
constexpr std::uint64_t kSeedAc5 = 5005;
constexpr std::uint64_t kSeedAc6 = 6006;
constexpr std::uint64_t kSeedAc7 = 7007;
constexpr std::uint64_t kSeedAc9 = 9009;
constexpr double kSignificance = 0.01;

struct Result {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    lines.push_back(std::string(ok ? "  ok   " : "  FAIL ") + buf);
    pass = pass && ok;
  }

  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    lines.push_back(std::string("  info ") + buf);
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ModelParams preset() {
  return make_params(0.1, ExcitationKernel::geometric(0.05, 0.5), MarkDistribution::exponential(0.3));
}

SimulationConfig sim_config(std::int64_t horizon, std::int64_t n_paths, std::uint64_t seed) {
  SimulationConfig c;
  c.horizon = horizon;
  c.n_paths = n_paths;
  c.master_seed = seed;
  c.workers = 0;
  return c;
}

std::vector<double> rates(const std::vector<PathResult>& paths, bool marks) {
  std::vector<double> out;
  for (const auto& p : paths) {
    const double x = marks ? p.terminal_L : static_cast<double>(p.terminal_N);
    out.push_back(x / static_cast<double>(p.horizon));
  }
  return out;
}

std::vector<double> normalized(const std::vector<PathResult>& paths, bool marks, double mu) {
  std::vector<double> out;
  for (const auto& p : paths) {
    const double t = static_cast<double>(p.horizon);
    const double x = marks ? p.terminal_L : static_cast<double>(p.terminal_N);
    out.push_back((x - mu * t) / std::sqrt(t));
  }
  return out;
}

fs::path output_dir(const std::string& name) {
  const fs::path dir = fs::path("acceptance_out") / name;
  fs::create_directories(dir);
  return dir;
}

Result ac1() {
  Result r;
  Stopwatch clock;
  const ModelParams p = make_params(0.5, ExcitationKernel::zero(), MarkDistribution::exponential(0.3));
  const auto paths = simulate_ensemble(p, sim_config(2000, 2000, kSeedAc1));
  const SampleStats rate = describe(rates(paths, false));
  r.check(std::fabs(rate.mean - 0.5) <= 3.0 * rate.standard_error(), "|mean(N_T/T) - 0.5| = %.3g <= 3 SE = %.3g",
          std::fabs(rate.mean - 0.5), 3.0 * rate.standard_error());
  std::vector<double> counts;
  for (const auto& q : paths) counts.push_back(static_cast<double>(q.terminal_N));
  const double var = describe(counts).variance;
  r.check(std::fabs(var / 1000.0 - 1.0) <= 0.05, "var(N_T) = %.2f within 5%% of nu T = 1000", var);
  const GofReport ks = ks_test_normal(normalized(paths, false, 0.5), 0.5, kSignificance);
  r.check(ks.passed, "KS vs N(0, 0.5): D = %.4g, p = %.4g", ks.statistic, ks.p_value);
  r.check(clock.seconds() < 10.0, "runtime %.2f s < 10 s", clock.seconds());
  return r;
}

Result ac2() {
  Result r;
  Stopwatch clock;
  const auto paths = simulate_ensemble(preset(), sim_config(10000, 1000, kSeedAc2));
  const double mn = describe(rates(paths, false)).mean;
  const double ml = describe(rates(paths, true)).mean;
  // nu / (1 - rho) = 0.1 / (2/3); E[l] times that = 0.15 / 0.3.
  r.check(std::fabs(mn - 0.15) < 0.0015, "|mean(N_T/T) - 0.15| = %.3g < 0.0015", std::fabs(mn - 0.15));
  r.check(std::fabs(ml - 0.5) < 0.005, "|mean(L_T/T) - 0.5| = %.3g < 0.005", std::fabs(ml - 0.5));
  r.check(clock.seconds() < 60.0, "runtime %.2f s < 60 s", clock.seconds());
  return r;
}

void write_figure(const fs::path& path, const std::vector<HistogramBin>& bins) {
  std::ofstream f(path, std::ios::binary);
  f << "bin_left,bin_right,count,density\n";
  for (const auto& b : bins) {
    f << cli::format_real(b.left) << ',' << cli::format_real(b.right) << ',' << b.count << ','
      << cli::format_real(b.density) << '\n';
  }
}

Result ac3() {
  Result r;
  Stopwatch clock;
  const auto paths = simulate_ensemble(preset(), sim_config(10000, 10000, kSeedAc3));
  const fs::path dir = output_dir("AC-3");
  // Hand-derived variances: 0.375 for N, 7.5 for L.
  for (const auto& [marks, mu, var] : {std::tuple{false, 0.15, 0.375}, std::tuple{true, 0.5, 7.5}}) {
    const auto z = normalized(paths, marks, mu);
    const GofReport ks = ks_test_normal(z, var, kSignificance);
    r.check(ks.passed, "KS %s vs N(0, %.4g): D = %.4g, p = %.4g", marks ? "L" : "N", var, ks.statistic,
            ks.p_value);
    const auto bins = histogram(z, 50, var);
    write_figure(dir / (marks ? "figure_L.csv" : "figure_N.csv"), bins);
    std::uint64_t total = 0;
    for (const auto& b : bins) total += b.count;
    r.check(total == paths.size(), "figure %s written with %llu samples", marks ? "L" : "N",
            static_cast<unsigned long long>(total));
  }
  r.check(clock.seconds() < 900.0, "runtime %.2f s < 900 s", clock.seconds());
  return r;
}

Result ac4() {
  Result r;
  Stopwatch clock;
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.3, 0.1}), MarkDistribution::constant(1.0));
  const CrosscheckReport c = oracle_crosscheck(p, 3, 10, 1000000, kSeedAc4, 0);
  r.check(c.tv_distance < 0.005, "TV(MC, exact) = %.4g < 0.005", c.tv_distance);
  double recursion = 0.0;
  for (const auto& m : exact_moment_recursion(p, 3)) recursion += m.mean_Z;
  r.check(std::fabs(c.exact_mean - recursion) < 1e-6, "|enumeration E[N_3] - recursion| = %.3g < 1e-6",
          std::fabs(c.exact_mean - recursion));
  // E[Z] = 0.2, 0.2 + 0.3*0.2, 0.2 + 0.3*0.26 + 0.1*0.2.
  r.check(std::fabs(recursion - 0.758) < 1e-12, "recursion E[N_3] = %.15g vs 0.758", recursion);
  r.check(clock.seconds() < 60.0, "runtime %.2f s < 60 s", clock.seconds());
  return r;
}

Result ac5() {
  Result r;
  Stopwatch clock;
  constexpr std::int64_t kHorizon = 1000;
  constexpr std::int64_t kPaths = 10000;
  const std::vector<std::pair<std::string, ExcitationKernel>> kernels{
      {"zero", ExcitationKernel::zero()},
      {"geometric(0.05,0.5)", ExcitationKernel::geometric(0.05, 0.5)},
      {"table(0.3,0.1)", ExcitationKernel::table({0.3, 0.1})}};
  const std::vector<std::pair<std::string, MarkDistribution>> marks{
      {"constant(1)", MarkDistribution::constant(1.0)}, {"exponential(1)", MarkDistribution::exponential(1.0)}};
  int violations = 0;
  int index = 0;
  for (double nu : {0.1, 0.5, 1.0}) {
    for (const auto& [kname, kernel] : kernels) {
      for (const auto& [mname, mark] : marks) {
        const ModelParams p = make_params(nu, kernel, mark);
        const TheoreticalLimits lim = theoretical_limits(p);
        double max_z = 0.0;
        double max_x = 0.0;
        for (const auto& m : exact_moment_recursion(p, kHorizon)) {
          max_z = std::max(max_z, m.mean_Z);
          max_x = std::max(max_x, m.mean_X);
        }
        const bool mean_ok = max_z <= lim.mean_bound_Z * (1.0 + 1e-12) && max_x <= lim.mean_bound_X * (1.0 + 1e-12);

        std::vector<double> s1(kHorizon, 0.0);
        std::vector<double> s2(kHorizon, 0.0);
        const SimulationConfig sim = sim_config(kHorizon, kPaths, kSeedAc5 + static_cast<std::uint64_t>(index++));
        for (std::int64_t i = 0; i < kPaths; ++i) {
          simulate_path_steps(p, sim, static_cast<std::uint64_t>(i), [&](const StepRecord& s) {
            const double l2 = s.lambda * s.lambda;
            s1[static_cast<std::size_t>(s.t - 1)] += l2;
            s2[static_cast<std::size_t>(s.t - 1)] += l2 * l2;
          });
        }
        const double n = static_cast<double>(kPaths);
        double worst = -INFINITY;
        std::int64_t worst_t = 0;
        double worst_mean = 0.0;
        for (std::int64_t t = 0; t < kHorizon; ++t) {
          const double mean = s1[t] / n;
          const double var = std::max(0.0, (s2[t] / n - mean * mean) * n / (n - 1.0));
          const double excess = mean - 3.0 * std::sqrt(var / n) - lim.lambda_m2_bound * (1.0 + 1e-12);
          if (excess > worst) {
            worst = excess;
            worst_t = t + 1;
            worst_mean = mean;
          }
        }
        const bool m2_ok = worst <= 0.0;
        if (!mean_ok || !m2_ok) ++violations;
        r.check(mean_ok && m2_ok,
                "nu=%.1f %s %s: max E[Z]=%.5g <= %.5g; E[lambda^2] at t=%lld is %.5g vs bound %.5g",
                nu, kname.c_str(), mname.c_str(), max_z, lim.mean_bound_Z, static_cast<long long>(worst_t),
                worst_mean, lim.lambda_m2_bound);
        if (kname.starts_with("geometric")) {
          const auto& mm = mark.moments();
          const auto exact = testsupport::geometric_lambda_second_moments(
              nu, 0.05, 0.5, mm.mean, mm.variance + mm.mean * mm.mean, kHorizon);
          r.note("  exact E[lambda_T^2] = %.6g (bound %.6g)", exact.back(), lim.lambda_m2_bound);
        }
      }
    }
  }
  r.note("%d of 18 configurations violate a bound", violations);
  r.check(clock.seconds() < 300.0, "runtime %.2f s < 300 s", clock.seconds());
  return r;
}

Result ac6() {
  Result r;
  const auto paths = simulate_ensemble(preset(), sim_config(1000, 10000, kSeedAc6));
  const MartingaleReport m = martingale_diagnostic(paths);
  const double threshold = 4.0 * std::sqrt(m.mean_sum_lambda / static_cast<double>(m.n_paths));
  r.check(std::fabs(m.mean_residual) < threshold, "|mean residual| = %.4g < %.4g", std::fabs(m.mean_residual),
          threshold);
  r.check(m.variance_ratio >= 0.95 && m.variance_ratio <= 1.05, "variance ratio %.4f in [0.95, 1.05]",
          m.variance_ratio);
  return r;
}

Result ac7() {
  Result r;
  {
    const ModelParams p = make_params(2.0, ExcitationKernel::zero(), MarkDistribution::constant(1.0));
    LindebergAccumulator acc(p, increment_moment_constants(p), IncrementTarget::kCounts);
    const SimulationConfig sim = sim_config(1000, 2000, kSeedAc7);
    for (std::int64_t i = 0; i < sim.n_paths; ++i) {
      simulate_path_steps(p, sim, static_cast<std::uint64_t>(i), [&](const StepRecord& s) { acc.add(s); });
    }
    // Poisson(2): central fourth moment 2 + 3 * 2^2.
    const double e = acc.empirical_mean();
    r.check(std::fabs(e / 14.0 - 1.0) <= 0.05, "constant marks, zero kernel: mean D^4 = %.4f within 5%% of 14", e);
  }
  {
    const ModelParams p = preset();
    const IncrementMomentConstants formula = increment_moment_constants(p);
    // Fourth moment of a centred compound Poisson sum with summand
    // W = 1 + a (l - E l): lambda E[W^4] + 3 lambda^2 E[W^2]^2.
    const double a = p.kernel.l1_norm();
    const double var = 1.0 / (0.3 * 0.3);
    const double mu3 = 2.0 / (0.3 * 0.3 * 0.3);
    const double mu4 = 9.0 * var * var;
    IncrementMomentConstants exact;
    exact.c1_N = 1.0 + 6.0 * a * a * var + 4.0 * a * a * a * mu3 + a * a * a * a * mu4;
    exact.c2_N = 3.0 * (1.0 + a * a * var) * (1.0 + a * a * var);
    LindebergAccumulator acc(p, formula, IncrementTarget::kCounts);
    LindebergAccumulator ref(p, exact, IncrementTarget::kCounts);
    const SimulationConfig sim = sim_config(1000, 10000, kSeedAc7 + 1);
    for (std::int64_t i = 0; i < sim.n_paths; ++i) {
      simulate_path_steps(p, sim, static_cast<std::uint64_t>(i), [&](const StepRecord& s) {
        acc.add(s);
        ref.add(s);
      });
    }
    const double ratio = acc.empirical_mean() / acc.predicted_mean();
    r.check(acc.samples() >= 10000000 && ratio >= 0.9 && ratio <= 1.1,
            "preset: empirical/predicted = %.4f in [0.9, 1.1] over %llu increments", ratio,
            static_cast<unsigned long long>(acc.samples()));
    r.note("preset with exact compound Poisson constants: ratio %.4f", ref.empirical_mean() / ref.predicted_mean());
  }
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Result ac8() {
  Result r;
  const fs::path dir = output_dir("AC-8");
  std::string reference;
  for (const char* w : {"1", "4", "8"}) {
    const std::string out = (dir / (std::string("workers_") + w)).string();
    const char* argv[] = {"dthawkes",         "simulate", "--seed", "2002", "--workers", w,
                          "--out",            out.c_str(), "--no-timestamp", "--set",
                          "simulation.horizon=10000", "--set", "simulation.n_paths=1000"};
    std::ostringstream sink;
    const int code = cli::run(static_cast<int>(std::size(argv)), argv, sink, sink);
    const std::string bytes = slurp(fs::path(out) / "terminal.csv");
    r.check(code == cli::kExitPass && !bytes.empty(), "workers=%s run exit %d, %zu bytes", w, code, bytes.size());
    if (reference.empty()) {
      reference = bytes;
    } else {
      r.check(bytes == reference, "workers=%s terminal.csv identical to workers=1", w);
    }
  }
  return r;
}

Result ac9() {
  Result r;
  const SeolModel model(0.2, ExcitationKernel::table({0.3}));
  const std::int64_t horizon = 10000;
  const auto totals = simulate_seol_ensemble(model, horizon, 1000, kSeedAc9, 0);
  const double mu = 2.0 / 7.0;
  const double variance = mu * (1.0 - mu) / (0.7 * 0.7);
  const double t = static_cast<double>(horizon);
  std::vector<double> rate;
  std::vector<double> z;
  for (auto s : totals) {
    rate.push_back(static_cast<double>(s) / t);
    z.push_back((static_cast<double>(s) - mu * t) / std::sqrt(t));
  }
  const SampleStats st = describe(rate);
  r.check(std::fabs(st.mean - mu) < 3.0 * st.standard_error(), "|mean(S_T/T) - 2/7| = %.3g < 3 SE = %.3g",
          std::fabs(st.mean - mu), 3.0 * st.standard_error());
  const GofReport ks = ks_test_normal(z, variance, kSignificance);
  r.check(ks.passed, "KS vs N(0, %.5f): D = %.4g, p = %.4g", variance, ks.statistic, ks.p_value);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<const char*, std::function<Result()>>> criteria{
      {"AC-1", {"Poisson reduction", ac1}},   {"AC-2", {"law of large numbers", ac2}},
      {"AC-3", {"CLT at full scale", ac3}},   {"AC-4", {"oracle equivalence", ac4}},
      {"AC-5", {"bound certificates", ac5}},  {"AC-6", {"martingale identities", ac6}},
      {"AC-7", {"fourth-moment formula", ac7}}, {"AC-8", {"determinism", ac8}},
      {"AC-9", {"0-1 baseline", ac9}}};
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(argv[i]);
  if (selected.empty()) {
    for (const auto& [name, entry] : criteria) selected.push_back(name);
  }
  int failures = 0;
  for (const auto& name : selected) {
    const auto it = criteria.find(name);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
      return 2;
    }
    Result r;
    try {
      r = it->second.second();
    } catch (const std::exception& e) {
      r.check(false, "exception: %s", e.what());
    }
    for (const auto& line : r.lines) std::printf("%s\n", line.c_str());
    std::printf("%s %s: %s\n", name.c_str(), it->second.first, r.pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
