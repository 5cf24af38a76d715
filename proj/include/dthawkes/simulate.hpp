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

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dthawkes/detail/parallel.hpp"
#include "dthawkes/detail/ring_buffer.hpp"
#include "dthawkes/error.hpp"
#include "dthawkes/model.hpp"
#include "dthawkes/poisson.hpp"
#include "dthawkes/random.hpp"

namespace dthawkes {

enum class RecordMode {
  kTerminalOnly,
  kFullSeries,
};

/// How the intensity is evaluated. kAutomatic uses the O(1) recursion for
/// geometric kernels and direct convolution otherwise; kDirect always
/// convolves the stored history.
enum class KernelEvaluation {
  kAutomatic,
  kDirect,
};

/// Kernel mass below which a dropped lag is not reported.
inline constexpr double kTruncationTolerance = 1e-12;
/// Lags whose remaining kernel mass is below this are not stored.
inline constexpr double kNegligibleKernelMass = 1e-15;

struct SimulationConfig {
  std::int64_t horizon = 1;
  std::int64_t n_paths = 1;
  std::uint64_t master_seed = 0;
  RecordMode record_mode = RecordMode::kTerminalOnly;
  /// Kernel history window in lags; absent means exact.
  std::optional<std::int64_t> truncation;
  /// 0 selects the hardware concurrency.
  unsigned workers = 1;
  KernelEvaluation evaluation = KernelEvaluation::kAutomatic;
};

inline void validate(const SimulationConfig& config) {
  if (config.horizon < 1 ||
      config.horizon > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
    throw InvalidParameter("simulation: horizon must lie in [1, 2^32)");
  }
  if (config.n_paths < 1) throw InvalidParameter("simulation: n_paths must be >= 1");
  if (config.truncation && *config.truncation < 1) {
    throw InvalidParameter("simulation: truncation must be >= 1");
  }
}

/// One step of a path as seen by a visitor.
struct StepRecord {
  std::int64_t t = 0;
  double lambda = 0.0;
  std::uint64_t count = 0;
  double mark_total = 0.0;
};

/// One realization. Series are filled in full-series mode only.
struct PathResult {
  std::int64_t horizon = 0;
  std::uint64_t path_index = 0;
  std::vector<double> lambda;
  std::vector<std::uint64_t> counts;
  std::vector<double> marks;
  std::uint64_t terminal_N = 0;
  double terminal_L = 0.0;
  /// sum_{s<=T} lambda_s; absent only for results built outside simulate.
  std::optional<double> sum_lambda;
  /// Set when truncation dropped more than kTruncationTolerance kernel mass.
  bool truncation_exceeded = false;

  bool has_series() const noexcept {
    return static_cast<std::int64_t>(lambda.size()) == horizon && horizon > 0;
  }
};

/// True when the configured window drops non-negligible kernel mass.
inline bool truncation_is_lossy(const ExcitationKernel& kernel, const SimulationConfig& config) {
  if (!config.truncation) return false;
  const std::int64_t window = *config.truncation;
  if (window >= config.horizon - 1) return false;
  return kernel.tail_sum(window + 1) > kTruncationTolerance;
}

/// Runs one path and hands every step to visit(const StepRecord&).
///
/// Draws for step t come from StepStream(master_seed, path_index, t), so the
/// path depends on (master_seed, path_index) only. Returns whether the
/// truncation window dropped kernel mass.
template <class Visitor>
bool simulate_path_steps(const ModelParams& params, const SimulationConfig& config,
                         std::uint64_t path_index, Visitor&& visit) {
  const double nu = params.nu;
  const ExcitationKernel& kernel = params.kernel;
  const MarkDistribution& marks = params.marks;
  const std::int64_t horizon = config.horizon;
  const bool lossy = truncation_is_lossy(kernel, config);

  const auto* geometric = std::get_if<GeometricKernel>(&kernel.spec());
  const bool fast = geometric != nullptr && !lossy &&
                    config.evaluation == KernelEvaluation::kAutomatic;

  if (fast) {
    const double weight = geometric->weight;
    const double ratio = geometric->ratio;
    double excitation = 0.0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const double lambda = nu + excitation;
      StepStream stream(config.master_seed, path_index, static_cast<std::uint32_t>(t));
      const std::uint64_t z = sample_poisson(stream, lambda);
      const double x = marks.sample_total(stream, z);
      visit(StepRecord{t, lambda, z, x});
      excitation = ratio * excitation + weight * x;
    }
    return false;
  }

  std::int64_t window = std::max<std::int64_t>(horizon - 1, 0);
  if (config.truncation) window = std::min(window, *config.truncation);
  window = std::min(window, kernel.effective_support(kNegligibleKernelMass, window));

  std::vector<double> weights(static_cast<std::size_t>(window));
  for (std::int64_t s = 1; s <= window; ++s) weights[static_cast<std::size_t>(s - 1)] = kernel(s);
  detail::RingBuffer<double> history(static_cast<std::size_t>(window));

  for (std::int64_t t = 1; t <= horizon; ++t) {
    const double lambda = nu + history.convolve(weights);
    StepStream stream(config.master_seed, path_index, static_cast<std::uint32_t>(t));
    const std::uint64_t z = sample_poisson(stream, lambda);
    const double x = marks.sample_total(stream, z);
    visit(StepRecord{t, lambda, z, x});
    history.push(x);
  }
  return lossy;
}

inline PathResult simulate_path(const ModelParams& params, const SimulationConfig& config,
                                std::uint64_t path_index) {
  validate(config);
  check_stability(params);
  if (path_index >= static_cast<std::uint64_t>(config.n_paths)) {
    throw InvalidParameter("simulate_path: path_index must be < n_paths");
  }
  PathResult result;
  result.horizon = config.horizon;
  result.path_index = path_index;
  const bool full = config.record_mode == RecordMode::kFullSeries;
  if (full) {
    const auto n = static_cast<std::size_t>(config.horizon);
    result.lambda.reserve(n);
    result.counts.reserve(n);
    result.marks.reserve(n);
  }
  detail::CompensatedSum sum_lambda;
  std::uint64_t total_n = 0;
  double total_l = 0.0;
  result.truncation_exceeded =
      simulate_path_steps(params, config, path_index, [&](const StepRecord& s) {
        sum_lambda.add(s.lambda);
        total_n += s.count;
        total_l += s.mark_total;
        if (full) {
          result.lambda.push_back(s.lambda);
          result.counts.push_back(s.count);
          result.marks.push_back(s.mark_total);
        }
      });
  result.terminal_N = total_n;
  result.terminal_L = total_l;
  result.sum_lambda = sum_lambda.value();
  return result;
}

/// Paths [first, first + count) of the ensemble, ordered by path index.
inline std::vector<PathResult> simulate_ensemble(const ModelParams& params,
                                                 const SimulationConfig& config,
                                                 std::uint64_t first, std::uint64_t count) {
  validate(config);
  check_stability(params);
  if (first + count > static_cast<std::uint64_t>(config.n_paths)) {
    throw InvalidParameter("simulate_ensemble: path range exceeds n_paths");
  }
  std::vector<PathResult> out(count);
  detail::parallel_for(count, config.workers, [&](std::uint64_t i) {
    out[i] = simulate_path(params, config, first + i);
  });
  return out;
}

/// All n_paths paths, ordered by path index.
inline std::vector<PathResult> simulate_ensemble(const ModelParams& params,
                                                 const SimulationConfig& config) {
  return simulate_ensemble(params, config, 0, static_cast<std::uint64_t>(config.n_paths));
}

/// 0-1 discrete Hawkes baseline: X_n = 1 with probability
/// alpha0 + sum_{i<n} alpha(n-i) X_i.
class SeolModel {
 public:
  SeolModel(double alpha0, ExcitationKernel kernel) : alpha0_(alpha0), kernel_(std::move(kernel)) {
    if (!(alpha0_ > 0.0 && alpha0_ < 1.0)) {
      throw InvalidParameter("0-1 baseline: alpha0 must lie in (0, 1)");
    }
    if (alpha0_ + kernel_.l1_norm() > 1.0) {
      throw InvalidParameter("0-1 baseline: alpha0 + ||alpha||_1 must not exceed 1");
    }
  }

  double alpha0() const noexcept { return alpha0_; }
  const ExcitationKernel& kernel() const noexcept { return kernel_; }

 private:
  double alpha0_;
  ExcitationKernel kernel_;
};

struct SeolPath {
  std::vector<std::uint8_t> indicators;  // filled when requested
  std::uint64_t total = 0;               // S_T
};

inline SeolPath simulate_seol_path(const SeolModel& model, std::int64_t horizon,
                                   std::uint64_t seed, std::uint64_t index,
                                   bool record_indicators = false) {
  if (horizon < 1 ||
      horizon > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
    throw InvalidParameter("0-1 baseline: horizon must lie in [1, 2^32)");
  }
  constexpr double kOverflowSlack = 1e-12;
  SeolPath path;
  if (record_indicators) path.indicators.reserve(static_cast<std::size_t>(horizon));

  const ExcitationKernel& kernel = model.kernel();
  const auto* geometric = std::get_if<GeometricKernel>(&kernel.spec());
  std::int64_t window = std::max<std::int64_t>(horizon - 1, 0);
  if (!geometric) window = kernel.effective_support(kNegligibleKernelMass, window);
  std::vector<double> weights;
  if (!geometric) {
    weights.resize(static_cast<std::size_t>(window));
    for (std::int64_t s = 1; s <= window; ++s) weights[static_cast<std::size_t>(s - 1)] = kernel(s);
  }
  detail::RingBuffer<double> history(geometric ? 0 : static_cast<std::size_t>(window));
  double excitation = 0.0;

  for (std::int64_t n = 1; n <= horizon; ++n) {
    const double p = model.alpha0() + (geometric ? excitation : history.convolve(weights));
    if (p > 1.0 + kOverflowSlack) {
      throw ProbabilityOverflow("0-1 baseline: success probability " + std::to_string(p) +
                                " exceeds 1 at step " + std::to_string(n));
    }
    StepStream stream(seed, index, static_cast<std::uint32_t>(n), StreamDomain::kSeol);
    const std::uint8_t x = stream.uniform() < p ? 1 : 0;
    path.total += x;
    if (record_indicators) path.indicators.push_back(x);
    if (geometric) {
      excitation = geometric->ratio * excitation + geometric->weight * x;
    } else {
      history.push(static_cast<double>(x));
    }
  }
  return path;
}

/// Terminal S_T for paths 0..n_paths-1, ordered by index.
inline std::vector<std::uint64_t> simulate_seol_ensemble(const SeolModel& model,
                                                         std::int64_t horizon,
                                                         std::int64_t n_paths,
                                                         std::uint64_t seed, unsigned workers) {
  if (n_paths < 1) throw InvalidParameter("0-1 baseline: n_paths must be >= 1");
  std::vector<std::uint64_t> totals(static_cast<std::size_t>(n_paths));
  detail::parallel_for(static_cast<std::uint64_t>(n_paths), workers, [&](std::uint64_t i) {
    totals[i] = simulate_seol_path(model, horizon, seed, i).total;
  });
  return totals;
}

}  // namespace dthawkes
