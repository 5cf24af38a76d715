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
#include <vector>

#include "dthawkes/detail/summation.hpp"
#include "dthawkes/error.hpp"
#include "dthawkes/model.hpp"
#include "dthawkes/simulate.hpp"

namespace dthawkes {

// Closed forms below are written with rho = ||alpha||_1 E[l] and all of
// them are linear in nu.

/// N_t / t -> nu / (1 - rho).
inline double lln_limit_counts(const ModelParams& params) {
  const double rho = check_stability(params);
  return params.nu / (1.0 - rho);
}

/// L_t / t -> nu E[l] / (1 - rho).
inline double lln_limit_marks(const ModelParams& params) {
  return lln_limit_counts(params) * params.marks.mean();
}

/// Asymptotic variance of (N_t - mu_N t) / sqrt(t):
/// nu (1 + ||alpha||_1^2 Var(l)) / (1 - rho)^3.
inline double clt_variance_counts(const ModelParams& params) {
  const double rho = check_stability(params);
  const double l1 = params.kernel.l1_norm();
  const double gap = 1.0 - rho;
  return params.nu * (1.0 + l1 * l1 * params.marks.moments().variance) / (gap * gap * gap);
}

/// Asymptotic variance of (L_t - mu_L t) / sqrt(t): nu E[l^2] / (1 - rho)^3.
inline double clt_variance_marks(const ModelParams& params) {
  const double rho = check_stability(params);
  const double gap = 1.0 - rho;
  return params.nu * params.marks.moments().second_raw / (gap * gap * gap);
}

struct MeanBounds {
  double bound_Z = 0.0;
  double bound_X = 0.0;
};

/// Uniform-in-t bounds E[Z_t] <= nu/(1-rho), E[X_t] <= nu E[l]/(1-rho).
inline MeanBounds mean_bounds(const ModelParams& params) {
  const double bound_z = lln_limit_counts(params);
  return {bound_z, bound_z * params.marks.mean()};
}

/// Claimed uniform bound on E[lambda_t^2]:
///   (nu ||alpha||^2 Var(l) / (1-rho) + nu^2 (1+rho)/(1-rho)) / (1 - rho^2).
inline double lambda_second_moment_bound(const ModelParams& params) {
  const double rho = check_stability(params);
  const double l1 = params.kernel.l1_norm();
  const double var = params.marks.moments().variance;
  const double nu = params.nu;
  return (nu * l1 * l1 * var / (1.0 - rho) + nu * nu * (1.0 + rho) / (1.0 - rho)) /
         (1.0 - rho * rho);
}

/// Constants of the conditional fourth moment of the martingale increments,
/// E[D_s^4 | F] = lambda_s c1 + lambda_s^2 c2, for the count martingale (N)
/// and, before the ||alpha||_1^4 factor, the mark martingale (L).
struct IncrementMomentConstants {
  double c1_N = 0.0;
  double c2_N = 0.0;
  double c1_L = 0.0;
  double c2_L = 0.0;
};

inline IncrementMomentConstants increment_moment_constants(const ModelParams& params) {
  const MarkMoments& m = params.marks.moments();
  if (!std::isfinite(m.centered_fourth) || !std::isfinite(m.variance)) {
    throw MissingMoment("increment constants need a finite fourth mark moment");
  }
  const double l1 = params.kernel.l1_norm();
  const double l1_2 = l1 * l1;
  const double l1_4 = l1_2 * l1_2;
  const double var = m.variance;
  const double var2 = var * var;
  // Kurt * Var^2 is the centered fourth moment, which stays defined when
  // Var = 0.
  const double kurt_var2 = m.centered_fourth;
  const double mu4 = m.mean * m.mean * m.mean * m.mean;
  IncrementMomentConstants c;
  c.c1_N = 1.0 + l1_4 * (kurt_var2 + 2.0 * var2);
  c.c2_N = 3.0 + 6.0 * l1_2 * var + l1_4 * var2;
  c.c1_L = mu4 + kurt_var2 + 2.0 * var2;
  c.c2_L = 3.0 * mu4 + 6.0 * var + var2;
  return c;
}

struct TheoreticalLimits {
  double mu_N = 0.0;
  double mu_L = 0.0;
  double sigma2_N = 0.0;
  double sigma2_L = 0.0;
  double mean_bound_Z = 0.0;
  double mean_bound_X = 0.0;
  double lambda_m2_bound = 0.0;
};

inline TheoreticalLimits theoretical_limits(const ModelParams& params) {
  TheoreticalLimits l;
  l.mu_N = lln_limit_counts(params);
  l.mu_L = lln_limit_marks(params);
  l.sigma2_N = clt_variance_counts(params);
  l.sigma2_L = clt_variance_marks(params);
  const MeanBounds b = mean_bounds(params);
  l.mean_bound_Z = b.bound_Z;
  l.mean_bound_X = b.bound_X;
  l.lambda_m2_bound = lambda_second_moment_bound(params);
  return l;
}

struct MomentPoint {
  double mean_lambda = 0.0;
  double mean_Z = 0.0;
  double mean_X = 0.0;
};

inline std::vector<MomentPoint> exact_moment_convolution(const ModelParams& params,
                                                         std::int64_t horizon);

/// E[lambda_t], E[Z_t], E[X_t] for t = 1..horizon (index t-1), from
/// E[lambda_t] = nu + sum_{s<t} alpha(s) E[X_{t-s}] and E[X_t] = E[l] E[Z_t].
/// O(T) for geometric kernels, O(T * support) otherwise.
inline std::vector<MomentPoint> exact_moment_recursion(const ModelParams& params,
                                                       std::int64_t horizon) {
  if (horizon < 1) throw InvalidParameter("moment recursion: horizon must be >= 1");
  const double nu = params.nu;
  const double mark_mean = params.marks.mean();
  std::vector<MomentPoint> out(static_cast<std::size_t>(horizon));

  if (const auto* g = std::get_if<GeometricKernel>(&params.kernel.spec())) {
    double excitation = 0.0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const double lam = nu + excitation;
      out[static_cast<std::size_t>(t - 1)] = {lam, lam, mark_mean * lam};
      excitation = g->ratio * excitation + g->weight * mark_mean * lam;
    }
    return out;
  }
  return exact_moment_convolution(params, horizon);
}

/// Same recursion evaluated by explicit convolution for every kernel.
inline std::vector<MomentPoint> exact_moment_convolution(const ModelParams& params,
                                                         std::int64_t horizon) {
  if (horizon < 1) throw InvalidParameter("moment recursion: horizon must be >= 1");
  const double nu = params.nu;
  const double mark_mean = params.marks.mean();
  std::int64_t window = horizon - 1;
  if (auto s = params.kernel.support()) window = std::min(window, *s);
  std::vector<double> weights(static_cast<std::size_t>(window));
  for (std::int64_t s = 1; s <= window; ++s) {
    weights[static_cast<std::size_t>(s - 1)] = params.kernel(s);
  }
  std::vector<MomentPoint> out(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 1; t <= horizon; ++t) {
    double acc = 0.0;
    const std::int64_t lags = std::min(t - 1, window);
    for (std::int64_t s = 1; s <= lags; ++s) {
      acc += weights[static_cast<std::size_t>(s - 1)] * out[static_cast<std::size_t>(t - s - 1)].mean_X;
    }
    const double lam = nu + acc;
    out[static_cast<std::size_t>(t - 1)] = {lam, lam, mark_mean * lam};
  }
  return out;
}

struct SeolLimits {
  double mu = 0.0;        // S_n / n -> mu
  double variance = 0.0;  // (S_n - mu n)/sqrt(n) -> N(0, variance)
};

/// mu = alpha0 / (1 - ||alpha||_1), variance = mu (1 - mu) / (1 - ||alpha||_1)^2.
inline SeolLimits seol_limits(const SeolModel& model) {
  const double l1 = model.kernel().l1_norm();
  if (!(l1 < 1.0)) throw UnstableModel(l1);
  const double gap = 1.0 - l1;
  const double mu = model.alpha0() / gap;
  return {mu, mu * (1.0 - mu) / (gap * gap)};
}

}  // namespace dthawkes
