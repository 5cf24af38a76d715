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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace dthawkes {

namespace detail {

inline constexpr int kLogFactorialTableSize = 256;

inline const std::array<double, kLogFactorialTableSize>& log_factorial_table() {
  static const std::array<double, kLogFactorialTableSize> table = [] {
    std::array<double, kLogFactorialTableSize> t{};
    t[0] = 0.0;
    for (int k = 1; k < kLogFactorialTableSize; ++k) t[k] = t[k - 1] + std::log(k);
    return t;
  }();
  return table;
}

}  // namespace detail

/// log(k!) without touching the global signgam that std::lgamma writes.
inline double log_factorial(std::uint64_t k) {
  if (k < static_cast<std::uint64_t>(detail::kLogFactorialTableSize)) {
    return detail::log_factorial_table()[k];
  }
  // Stirling series; error below 1e-17 relative for k >= 256.
  const double x = static_cast<double>(k) + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x - 0.5) * std::log(x) - x + 0.91893853320467274178 +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

/// Means below this use sequential-search inversion (one uniform); above it
/// Hormann's transformed rejection (PTRS).
inline constexpr double kPoissonInversionCutoff = 10.0;

/// Poisson(mean) variate. Stream must provide uniform() on (0, 1).
template <class Stream>
std::uint64_t sample_poisson(Stream& stream, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < kPoissonInversionCutoff) {
    const double u = stream.uniform();
    double pmf = std::exp(-mean);
    double cdf = pmf;
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      pmf *= mean / static_cast<double>(k);
      cdf += pmf;
      // The remaining mass is below double resolution.
      if (pmf < std::numeric_limits<double>::min()) break;
    }
    return k;
  }

  // W. Hormann, "The transformed rejection method for generating Poisson
  // random variables", Insurance: Mathematics and Economics 12 (1993).
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::uint64_t>(kd);
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + kd * log_mean - log_factorial(k);
    if (lhs <= rhs) return k;
  }
}

/// P(Z = k) for Z ~ Poisson(mean).
inline double poisson_pmf(std::uint64_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(k) * std::log(mean) - mean - log_factorial(k));
}

}  // namespace dthawkes
