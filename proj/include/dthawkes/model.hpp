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
#include <span>
#include <vector>

#include "dthawkes/error.hpp"
#include "dthawkes/kernel.hpp"
#include "dthawkes/marks.hpp"

namespace dthawkes {

/// Base intensity, excitation kernel and mark law of a discrete-time marked
/// Hawkes process. Use make_params() to obtain a value checked for
/// stability; the aggregate itself is unchecked so that check_stability can
/// report on any candidate.
struct ModelParams {
  double nu = 0.0;
  ExcitationKernel kernel = ExcitationKernel::zero();
  MarkDistribution marks = MarkDistribution::constant(1.0);

  /// rho = ||alpha||_1 * E[mark].
  double branching_ratio() const { return kernel.l1_norm() * marks.mean(); }
};

/// Returns the branching ratio; throws UnstableModel when it is >= 1.
inline double check_stability(const ModelParams& params) {
  const double rho = params.branching_ratio();
  if (!(rho < 1.0)) throw UnstableModel(rho);
  return rho;
}

/// Validated construction: nu must be finite and >= 0, rho < 1.
inline ModelParams make_params(double nu, ExcitationKernel kernel, MarkDistribution marks) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw InvalidParameter("base intensity nu must be finite and >= 0");
  }
  ModelParams p{nu, std::move(kernel), std::move(marks)};
  check_stability(p);
  return p;
}

/// nu = 0.1, alpha(s) = 0.05 * 0.5^(s-1), exponential marks with rate 0.3.
/// Branching ratio 1/3.
inline ModelParams example_preset() {
  return make_params(0.1, ExcitationKernel::geometric(0.05, 0.5),
                     MarkDistribution::exponential(0.3));
}

struct TailConditionPoint {
  std::int64_t t = 0;
  double value = 0.0;
};

/// v(t) = t^-1/2 * sum_{u=1}^{t-1} tail_sum(1+u) over a grid, with a verdict
/// on whether v(t) -> 0. `analytic` is set when the verdict follows from the
/// kernel family rather than from the grid values.
struct TailConditionReport {
  std::vector<TailConditionPoint> points;
  bool holds = false;
  bool analytic = false;
};

inline TailConditionReport check_clt_tail_condition(const ExcitationKernel& kernel,
                                                    std::span<const std::int64_t> t_grid) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 2) throw InvalidParameter("tail condition: grid entries must be >= 2");
    if (i > 0 && t_grid[i] <= t_grid[i - 1]) {
      throw InvalidParameter("tail condition: grid must be strictly increasing");
    }
  }

  TailConditionReport report;
  report.points.reserve(t_grid.size());
  detail::CompensatedSum running;  // sum_{u=1}^{t-1} tail_sum(1+u)
  std::int64_t next_u = 1;
  for (const std::int64_t t : t_grid) {
    if (const auto* g = std::get_if<GeometricKernel>(&kernel.spec())) {
      // sum_{u=1}^{t-1} w b^u / (1-b) = w b (1 - b^(t-1)) / (1-b)^2
      const double b = g->ratio;
      const double s = g->weight * b * (1.0 - std::pow(b, static_cast<double>(t - 1))) /
                       ((1.0 - b) * (1.0 - b));
      report.points.push_back({t, s / std::sqrt(static_cast<double>(t))});
      continue;
    }
    for (; next_u <= t - 1; ++next_u) running.add(kernel.tail_sum(1 + next_u));
    report.points.push_back({t, running.value() / std::sqrt(static_cast<double>(t))});
  }

  if (std::holds_alternative<PowerLawKernel>(kernel.spec())) {
    constexpr double kTolerance = 1e-9;
    bool decreasing = true;
    const std::size_t start = report.points.size() / 2;
    for (std::size_t i = start + 1; i < report.points.size(); ++i) {
      if (report.points[i].value > report.points[i - 1].value + kTolerance) decreasing = false;
    }
    report.holds = decreasing && report.points.size() >= 2;
    report.analytic = false;
  } else {
    // Geometric and finite tables have summable tails, so v(t) = O(t^-1/2).
    report.holds = true;
    report.analytic = true;
  }
  return report;
}

}  // namespace dthawkes
