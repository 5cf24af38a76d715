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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "dthawkes/detail/summation.hpp"
#include "dthawkes/error.hpp"
#include "dthawkes/model.hpp"
#include "dthawkes/simulate.hpp"
#include "dthawkes/theory.hpp"

namespace dthawkes {

// ---------------------------------------------------------------------------
// Elementary sample statistics

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; zero when count < 2

  double standard_error() const {
    return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
  }
};

/// Two-pass compensated mean and variance.
inline SampleStats describe(std::span<const double> xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  detail::CompensatedSum sum;
  for (double x : xs) sum.add(x);
  s.mean = sum.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    detail::CompensatedSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.variance = sq.value() / static_cast<double>(xs.size() - 1);
  }
  return s;
}

/// Per-index running mean and variance of a quantity observed across paths,
/// e.g. lambda_t^2 for every t. Welford updates; feed paths in any batches.
class CrossPathProfile {
 public:
  explicit CrossPathProfile(std::size_t length) : count_(length, 0), mean_(length), m2_(length) {}

  std::size_t length() const noexcept { return mean_.size(); }

  void add(std::size_t index, double x) {
    const auto n = static_cast<double>(++count_[index]);
    const double delta = x - mean_[index];
    mean_[index] += delta / n;
    m2_[index] += delta * (x - mean_[index]);
  }

  SampleStats at(std::size_t index) const {
    SampleStats s;
    s.count = count_[index];
    s.mean = mean_[index];
    s.variance = s.count > 1 ? m2_[index] / static_cast<double>(s.count - 1) : 0.0;
    return s;
  }

 private:
  std::vector<std::size_t> count_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

// ---------------------------------------------------------------------------
// Normal law

/// P(X <= x) for X ~ N(0, variance).
inline double normal_cdf(double x, double variance = 1.0) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

/// Density of N(0, variance) at x.
inline double normal_pdf(double x, double variance = 1.0) {
  return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// P(K > x) for the Kolmogorov distribution K = sup |B(t)|. Series are cut
/// once terms fall below 1e-12.
inline double kolmogorov_survival(double x) {
  constexpr double kTermCutoff = 1e-12;
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // P(K <= x) = sqrt(2 pi)/x sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(c * m * m);
      cdf += term;
      if (term < kTermCutoff) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  // P(K > x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < kTermCutoff) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct GofReport {
  double statistic = 0.0;  // sup-distance D_n in [0, 1]
  double p_value = 1.0;
  std::size_t n = 0;
  double target_variance = 1.0;
  double significance = 0.01;
  bool passed = true;  // not rejected at `significance`
};

/// One-sample KS test of `samples` against N(0, variance), asymptotic
/// p-value P(K > sqrt(n) D_n).
inline GofReport ks_test_normal(std::span<const double> samples, double variance,
                                double significance = 0.01) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DegenerateVariance("KS test: target variance must be positive");
  }
  if (samples.size() < 8) throw InvalidParameter("KS test: need at least 8 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = 0.5 * std::erfc(-(sorted[i] / sd) / std::numbers::sqrt2);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  GofReport r;
  r.statistic = d;
  r.n = sorted.size();
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  r.target_variance = variance;
  r.significance = significance;
  r.passed = r.p_value >= significance;
  return r;
}

// ---------------------------------------------------------------------------
// Ensemble summaries

struct MartingaleReport {
  double mean_residual = 0.0;      // cross-path mean of N_T - sum lambda_s
  double residual_variance = 0.0;  // cross-path variance of the residual
  double mean_sum_lambda = 0.0;    // cross-path mean of sum lambda_s
  double variance_ratio = 0.0;     // residual_variance / mean_sum_lambda
  double residual_standard_error = 0.0;
  std::size_t n_paths = 0;
};

/// Checks that N_t - sum_{s<=t} lambda_s is a zero-mean martingale whose
/// second moment equals E[sum lambda_s].
inline MartingaleReport martingale_diagnostic(std::span<const PathResult> paths) {
  if (paths.size() < 2) {
    throw MissingLambdaAccumulator("martingale diagnostic: need at least 2 paths");
  }
  std::vector<double> residual;
  std::vector<double> sums;
  residual.reserve(paths.size());
  sums.reserve(paths.size());
  for (const auto& p : paths) {
    if (!p.sum_lambda) {
      throw MissingLambdaAccumulator("martingale diagnostic: path " +
                                     std::to_string(p.path_index) + " lacks sum_lambda");
    }
    residual.push_back(static_cast<double>(p.terminal_N) - *p.sum_lambda);
    sums.push_back(*p.sum_lambda);
  }
  const SampleStats r = describe(residual);
  const SampleStats s = describe(sums);
  MartingaleReport out;
  out.mean_residual = r.mean;
  out.residual_variance = r.variance;
  out.mean_sum_lambda = s.mean;
  out.variance_ratio = s.mean > 0.0 ? r.variance / s.mean
                                    : std::numeric_limits<double>::quiet_NaN();
  out.residual_standard_error = r.standard_error();
  out.n_paths = paths.size();
  return out;
}

struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::int64_t horizon = 0;
  double mean_N_over_t = 0.0;
  double var_N_over_t = 0.0;
  double mean_L_over_t = 0.0;
  double var_L_over_t = 0.0;
  std::vector<double> normalized_N;  // (N_T - mu_N T) / sqrt(T), by path index
  std::vector<double> normalized_L;
  std::optional<double> martingale_mean;
  std::optional<double> martingale_var_ratio;
};

inline EnsembleSummary summarize(std::span<const PathResult> paths,
                                 const TheoreticalLimits& limits) {
  if (paths.empty()) throw InvalidParameter("summarize: empty ensemble");
  const std::int64_t horizon = paths.front().horizon;
  for (const auto& p : paths) {
    if (p.horizon != horizon) throw MixedHorizons("summarize: paths have different horizons");
  }
  const double t = static_cast<double>(horizon);
  const double root_t = std::sqrt(t);
  EnsembleSummary s;
  s.n_paths = paths.size();
  s.horizon = horizon;
  std::vector<double> n_rate;
  std::vector<double> l_rate;
  n_rate.reserve(paths.size());
  l_rate.reserve(paths.size());
  s.normalized_N.reserve(paths.size());
  s.normalized_L.reserve(paths.size());
  for (const auto& p : paths) {
    const double n = static_cast<double>(p.terminal_N);
    n_rate.push_back(n / t);
    l_rate.push_back(p.terminal_L / t);
    s.normalized_N.push_back((n - limits.mu_N * t) / root_t);
    s.normalized_L.push_back((p.terminal_L - limits.mu_L * t) / root_t);
  }
  const SampleStats ns = describe(n_rate);
  const SampleStats ls = describe(l_rate);
  s.mean_N_over_t = ns.mean;
  s.var_N_over_t = ns.variance;
  s.mean_L_over_t = ls.mean;
  s.var_L_over_t = ls.variance;
  const bool have_lambda =
      std::all_of(paths.begin(), paths.end(), [](const auto& p) { return p.sum_lambda.has_value(); });
  if (have_lambda && paths.size() >= 2) {
    const MartingaleReport m = martingale_diagnostic(paths);
    s.martingale_mean = m.mean_residual;
    s.martingale_var_ratio = m.variance_ratio;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Conditional fourth moments of martingale increments

enum class IncrementTarget {
  /// D_s = sum_{i<=Z_s} (1 + ||alpha||_1 (l_i - E l)) - lambda_s
  kCounts,
  /// D~_s = ||alpha||_1 (E[l] (Z_s - lambda_s) + sum_{i<=Z_s} (l_i - E l))
  kMarks,
};

/// Streams (lambda_s, Z_s, X_s) and compares the average of D_s^4 with the
/// average of the predicted lambda_s c1 + lambda_s^2 c2.
class LindebergAccumulator {
 public:
  LindebergAccumulator(const ModelParams& params, const IncrementMomentConstants& constants,
                       IncrementTarget target = IncrementTarget::kCounts)
      : l1_(params.kernel.l1_norm()), mark_mean_(params.marks.mean()), target_(target) {
    if (target == IncrementTarget::kCounts) {
      c1_ = constants.c1_N;
      c2_ = constants.c2_N;
      scale_ = 1.0;
    } else {
      c1_ = constants.c1_L;
      c2_ = constants.c2_L;
      const double l1_2 = l1_ * l1_;
      scale_ = l1_2 * l1_2;
    }
  }

  static double increment(double l1, double mark_mean, IncrementTarget target, double lambda,
                          std::uint64_t count, double mark_total) {
    const double z = static_cast<double>(count);
    const double centered = mark_total - mark_mean * z;  // sum (l_i - E l)
    if (target == IncrementTarget::kCounts) return z + l1 * centered - lambda;
    return l1 * (mark_mean * (z - lambda) + centered);
  }

  void add(double lambda, std::uint64_t count, double mark_total) {
    const double d = increment(l1_, mark_mean_, target_, lambda, count, mark_total);
    const double d2 = d * d;
    empirical_.add(d2 * d2);
    predicted_.add(scale_ * (lambda * c1_ + lambda * lambda * c2_));
    ++samples_;
  }

  void add(const StepRecord& s) { add(s.lambda, s.count, s.mark_total); }

  std::uint64_t samples() const noexcept { return samples_; }
  double empirical_mean() const {
    return samples_ ? empirical_.value() / static_cast<double>(samples_) : 0.0;
  }
  double predicted_mean() const {
    return samples_ ? predicted_.value() / static_cast<double>(samples_) : 0.0;
  }
  double ratio() const { return empirical_.value() / predicted_.value(); }

 private:
  double l1_;
  double mark_mean_;
  IncrementTarget target_;
  double c1_ = 0.0;
  double c2_ = 0.0;
  double scale_ = 1.0;
  detail::CompensatedSum empirical_;
  detail::CompensatedSum predicted_;
  std::uint64_t samples_ = 0;
};

struct LindebergReport {
  double empirical_mean = 0.0;  // time-and-path average of D_s^4
  double predicted_mean = 0.0;  // average of lambda_s c1 + lambda_s^2 c2
  double empirical_over_predicted = 0.0;
  std::uint64_t samples = 0;
};

inline LindebergReport lindeberg_diagnostic(std::span<const PathResult> paths,
                                            const ModelParams& params,
                                            const IncrementMomentConstants& constants,
                                            IncrementTarget target = IncrementTarget::kCounts) {
  LindebergAccumulator acc(params, constants, target);
  for (const auto& p : paths) {
    if (!p.has_series()) {
      throw MissingSeries("lindeberg diagnostic: path " + std::to_string(p.path_index) +
                          " was recorded without series");
    }
    for (std::size_t i = 0; i < p.lambda.size(); ++i) acc.add(p.lambda[i], p.counts[i], p.marks[i]);
  }
  return {acc.empirical_mean(), acc.predicted_mean(), acc.ratio(), acc.samples()};
}

// ---------------------------------------------------------------------------
// Histogram with normal overlay

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::uint64_t count = 0;
  double density = 0.0;  // N(0, overlay_variance) pdf at the bin center
};

/// Equal-width bins over [min, max] (last bin closed). Constant samples get
/// unit-width bins centred on the value.
inline std::vector<HistogramBin> histogram(std::span<const double> samples, int n_bins,
                                           double overlay_variance) {
  if (n_bins < 2) throw InvalidParameter("histogram: need at least 2 bins");
  if (samples.empty()) throw InvalidParameter("histogram: no samples");
  if (!(overlay_variance > 0.0)) throw DegenerateVariance("histogram: overlay variance <= 0");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5 * n_bins;
    hi += 0.5 * n_bins;
  }
  const double width = (hi - lo) / n_bins;
  std::vector<HistogramBin> bins(static_cast<std::size_t>(n_bins));
  for (int i = 0; i < n_bins; ++i) {
    auto& b = bins[static_cast<std::size_t>(i)];
    b.left = lo + width * i;
    b.right = (i + 1 == n_bins) ? hi : lo + width * (i + 1);
    b.density = normal_pdf(0.5 * (b.left + b.right), overlay_variance);
  }
  for (double x : samples) {
    auto i = static_cast<std::int64_t>(std::floor((x - lo) / width));
    i = std::clamp<std::int64_t>(i, 0, n_bins - 1);
    ++bins[static_cast<std::size_t>(i)].count;
  }
  return bins;
}

struct ChiSquareReport {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
};

/// Pearson chi-square of histogram counts against n * density * width,
/// pooling adjacent bins until each expected count reaches min_expected.
inline ChiSquareReport histogram_chi_square(std::span<const HistogramBin> bins,
                                            double min_expected = 5.0) {
  std::uint64_t n = 0;
  for (const auto& b : bins) n += b.count;
  std::vector<std::pair<double, double>> cells;  // (observed, expected)
  double obs = 0.0;
  double exp = 0.0;
  for (const auto& b : bins) {
    obs += static_cast<double>(b.count);
    exp += static_cast<double>(n) * b.density * (b.right - b.left);
    if (exp >= min_expected) {
      cells.emplace_back(obs, exp);
      obs = exp = 0.0;
    }
  }
  if (obs > 0.0 || exp > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(obs, exp);
    } else {
      cells.back().first += obs;
      cells.back().second += exp;
    }
  }
  ChiSquareReport r;
  for (const auto& [o, e] : cells) r.statistic += (o - e) * (o - e) / e;
  r.degrees_of_freedom = static_cast<int>(cells.size()) - 1;
  r.p_value = r.degrees_of_freedom > 0
                  ? boost::math::gamma_q(0.5 * r.degrees_of_freedom, 0.5 * r.statistic)
                  : 1.0;
  return r;
}

}  // namespace dthawkes
