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
#include <cstdio>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dthawkes/detail/parallel.hpp"
#include "dthawkes/detail/summation.hpp"
#include "dthawkes/error.hpp"
#include "dthawkes/model.hpp"
#include "dthawkes/poisson.hpp"
#include "dthawkes/simulate.hpp"

namespace dthawkes {

inline constexpr std::int64_t kOracleMaxHorizon = 4;
inline constexpr int kOracleMaxZCap = 12;
inline constexpr double kOracleTruncationCap = 1e-8;

/// Discrete law as (value, probability) pairs sorted by value, plus the
/// probability mass cut off by Poisson truncation (not renormalized).
struct ExactDistribution {
  std::vector<std::pair<double, double>> support;
  double truncation_mass = 0.0;

  double total_probability() const {
    detail::CompensatedSum s;
    for (const auto& [v, p] : support) s.add(p);
    return s.value();
  }

  double mean() const {
    detail::CompensatedSum s;
    for (const auto& [v, p] : support) s.add(v * p);
    return s.value();
  }

  double probability_of(double value) const {
    const auto it = std::lower_bound(support.begin(), support.end(), value,
                                     [](const auto& a, double v) { return a.first < v; });
    return (it != support.end() && it->first == value) ? it->second : 0.0;
  }
};

struct ExactLaws {
  ExactDistribution counts;  // law of N_T
  ExactDistribution marks;   // law of L_T
};

namespace detail {

struct MarkOutcome {
  double probability = 0.0;
  double total = 0.0;
};

// Laws of the sum of z i.i.d. discrete marks for z = 0..z_cap, by
// enumerating atom multiplicities with multinomial weights.
inline std::vector<std::vector<MarkOutcome>> mark_sum_laws(const std::vector<MarkAtom>& atoms,
                                                           int z_cap) {
  std::vector<std::vector<MarkOutcome>> laws(static_cast<std::size_t>(z_cap) + 1);
  std::vector<int> multiplicity(atoms.size(), 0);
  for (int z = 0; z <= z_cap; ++z) {
    std::map<double, CompensatedSum> by_total;
    // Recursive walk over compositions of z into atoms.size() parts.
    auto walk = [&](auto&& self, std::size_t atom, int remaining) -> void {
      if (atom + 1 == atoms.size()) {
        multiplicity[atom] = remaining;
        double log_p = log_factorial(static_cast<std::uint64_t>(z));
        double total = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          const int c = multiplicity[i];
          log_p += c * std::log(atoms[i].probability) - log_factorial(static_cast<std::uint64_t>(c));
          total += c * atoms[i].value;
        }
        by_total[total].add(std::exp(log_p));
        return;
      }
      for (int c = 0; c <= remaining; ++c) {
        multiplicity[atom] = c;
        self(self, atom + 1, remaining - c);
      }
    };
    walk(walk, 0, z);
    for (const auto& [total, p] : by_total) {
      laws[static_cast<std::size_t>(z)].push_back({p.value(), total});
    }
  }
  return laws;
}

// P(Z > cap) for Z ~ Poisson(mean), summed directly to avoid cancellation.
inline double poisson_upper_tail(int cap, double mean) {
  if (mean == 0.0) return 0.0;
  double term = poisson_pmf(static_cast<std::uint64_t>(cap) + 1, mean);
  CompensatedSum s;
  for (std::uint64_t k = static_cast<std::uint64_t>(cap) + 1; term > 0.0; ++k) {
    s.add(term);
    term *= mean / static_cast<double>(k + 1);
    if (term < 1e-30 * s.value()) break;
  }
  return s.value();
}

inline ExactDistribution finalize_law(std::vector<std::pair<double, double>> atoms,
                                      double truncation_mass) {
  std::sort(atoms.begin(), atoms.end());
  ExactDistribution out;
  out.truncation_mass = truncation_mass;
  for (std::size_t i = 0; i < atoms.size();) {
    const double v = atoms[i].first;
    CompensatedSum p;
    std::size_t j = i;
    // Equal sums reached by different step decompositions may differ by
    // rounding; merge values within 1e-12 relative.
    while (j < atoms.size() && std::fabs(atoms[j].first - v) <= 1e-12 * std::max(1.0, std::fabs(v))) {
      p.add(atoms[j].second);
      ++j;
    }
    if (p.value() > 0.0) out.support.emplace_back(v, p.value());
    i = j;
  }
  return out;
}

}  // namespace detail

/// Exact laws of N_T and L_T by exhaustive enumeration of (Z_t, marks_t) for
/// t = 1..T, with every Z_t truncated at z_cap. Discrete marks only,
/// T <= 4, z_cap <= 12.
inline ExactLaws enumerate_distribution(const ModelParams& params, std::int64_t horizon, int z_cap,
                                        double truncation_cap = kOracleTruncationCap) {
  check_stability(params);
  if (!params.marks.is_discrete()) {
    throw InvalidParameter("enumeration: marks must be discrete");
  }
  if (horizon < 1 || horizon > kOracleMaxHorizon) {
    throw InvalidParameter("enumeration: horizon must lie in [1, 4]");
  }
  if (z_cap < 0 || z_cap > kOracleMaxZCap) {
    throw InvalidParameter("enumeration: z_cap must lie in [0, 12]");
  }
  const auto mark_laws = detail::mark_sum_laws(params.marks.atoms(), z_cap);
  std::vector<double> weights(static_cast<std::size_t>(horizon));
  for (std::int64_t s = 1; s <= horizon; ++s) weights[static_cast<std::size_t>(s - 1)] = params.kernel(s);

  // Leaves are folded into accumulators keyed by N_T and by the exact L_T
  // value; near-equal L_T values are merged in finalize_law.
  std::vector<detail::CompensatedSum> n_law(static_cast<std::size_t>(z_cap * horizon) + 1);
  std::unordered_map<double, detail::CompensatedSum> l_law;
  detail::CompensatedSum truncated;
  std::vector<double> x_history(static_cast<std::size_t>(horizon), 0.0);

  auto visit = [&](auto&& self, std::int64_t t, double prob, std::uint64_t n, double l) -> void {
    double lambda = params.nu;
    for (std::int64_t s = 1; s < t; ++s) {
      lambda += weights[static_cast<std::size_t>(s - 1)] * x_history[static_cast<std::size_t>(t - s - 1)];
    }
    truncated.add(prob * detail::poisson_upper_tail(z_cap, lambda));
    const bool last = t == horizon;
    for (int z = 0; z <= z_cap; ++z) {
      const double pz = poisson_pmf(static_cast<std::uint64_t>(z), lambda);
      if (pz == 0.0) continue;
      const std::uint64_t next_n = n + static_cast<std::uint64_t>(z);
      if (last) n_law[static_cast<std::size_t>(next_n)].add(prob * pz);
      for (const auto& outcome : mark_laws[static_cast<std::size_t>(z)]) {
        const double p = prob * pz * outcome.probability;
        if (p == 0.0) continue;
        if (last) {
          l_law[l + outcome.total].add(p);
          continue;
        }
        x_history[static_cast<std::size_t>(t - 1)] = outcome.total;
        self(self, t + 1, p, next_n, l + outcome.total);
      }
    }
    x_history[static_cast<std::size_t>(t - 1)] = 0.0;
  };
  visit(visit, 1, 1.0, 0, 0.0);

  const double truncation_mass = truncated.value();
  if (!(truncation_mass < truncation_cap)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "enumeration: truncated mass %.3g is not below %.3g",
                  truncation_mass, truncation_cap);
    throw TruncationTooCoarse(buf);
  }
  std::vector<std::pair<double, double>> n_atoms;
  for (std::size_t n = 0; n < n_law.size(); ++n) {
    if (n_law[n].value() > 0.0) n_atoms.emplace_back(static_cast<double>(n), n_law[n].value());
  }
  std::vector<std::pair<double, double>> l_atoms;
  l_atoms.reserve(l_law.size());
  for (const auto& [v, p] : l_law) l_atoms.emplace_back(v, p.value());
  return {detail::finalize_law(std::move(n_atoms), truncation_mass),
          detail::finalize_law(std::move(l_atoms), truncation_mass)};
}

/// Empirical law of integer samples.
inline ExactDistribution empirical_law(std::span<const std::uint64_t> samples) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (auto s : samples) ++counts[s];
  ExactDistribution out;
  const double n = static_cast<double>(samples.size());
  for (const auto& [v, c] : counts) out.support.emplace_back(static_cast<double>(v), static_cast<double>(c) / n);
  return out;
}

/// Half the l1 distance between two discrete laws over the union of their
/// supports. Truncation mass is not counted.
inline double tv_distance(const ExactDistribution& a, const ExactDistribution& b) {
  detail::CompensatedSum s;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.support.size() || j < b.support.size()) {
    if (j == b.support.size() || (i < a.support.size() && a.support[i].first < b.support[j].first)) {
      s.add(a.support[i++].second);
    } else if (i == a.support.size() || b.support[j].first < a.support[i].first) {
      s.add(b.support[j++].second);
    } else {
      s.add(std::fabs(a.support[i++].second - b.support[j++].second));
    }
  }
  return 0.5 * s.value();
}

struct CrosscheckReport {
  double tv_distance = 0.0;
  double threshold = 0.0;  // 3 sqrt(support_size / n_mc)
  std::size_t support_size = 0;
  std::uint64_t n_mc = 0;
  double exact_mean = 0.0;
  double empirical_mean = 0.0;
  bool passed = false;
  ExactLaws exact;
  ExactDistribution empirical;
};

/// Compares the exact law of N_T under `exact_model` against n_mc simulated
/// paths of `simulated_model`.
inline CrosscheckReport oracle_crosscheck(const ModelParams& exact_model,
                                          const ModelParams& simulated_model,
                                          std::int64_t horizon, int z_cap, std::uint64_t n_mc,
                                          std::uint64_t seed, unsigned workers = 1) {
  if (n_mc < 1) throw InvalidParameter("crosscheck: n_mc must be >= 1");
  CrosscheckReport r;
  r.exact = enumerate_distribution(exact_model, horizon, z_cap);
  check_stability(simulated_model);

  SimulationConfig config;
  config.horizon = horizon;
  config.n_paths = static_cast<std::int64_t>(n_mc);
  config.master_seed = seed;
  validate(config);
  std::vector<std::uint64_t> totals(n_mc);
  detail::parallel_for(n_mc, workers, [&](std::uint64_t i) {
    std::uint64_t n = 0;
    simulate_path_steps(simulated_model, config, i, [&n](const StepRecord& s) { n += s.count; });
    totals[i] = n;
  });
  const ExactDistribution empirical = empirical_law(totals);
  r.tv_distance = tv_distance(empirical, r.exact.counts);
  r.empirical = empirical;
  r.support_size = r.exact.counts.support.size();
  r.n_mc = n_mc;
  r.threshold = 3.0 * std::sqrt(static_cast<double>(r.support_size) / static_cast<double>(n_mc));
  r.exact_mean = r.exact.counts.mean();
  r.empirical_mean = empirical.mean();
  r.passed = r.tv_distance < r.threshold;
  return r;
}

inline CrosscheckReport oracle_crosscheck(const ModelParams& params, std::int64_t horizon,
                                          int z_cap, std::uint64_t n_mc, std::uint64_t seed,
                                          unsigned workers = 1) {
  return oracle_crosscheck(params, params, horizon, z_cap, n_mc, seed, workers);
}

}  // namespace dthawkes
