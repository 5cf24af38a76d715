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
#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "dthawkes/oracle.hpp"
#include "dthawkes/theory.hpp"

namespace dthawkes {
namespace {

TEST(OracleTest, ZeroKernelIsPoissonSum) {
  const ModelParams p = make_params(0.2, ExcitationKernel::zero(), MarkDistribution::constant(1.0));
  const ExactLaws laws = enumerate_distribution(p, 2, 12);
  EXPECT_NEAR(laws.counts.probability_of(0.0), std::exp(-0.4), 1e-12);
  EXPECT_NEAR(laws.counts.probability_of(3.0), std::exp(-0.4) * 0.064 / 6.0, 1e-12);
  EXPECT_NEAR(laws.counts.total_probability() + laws.counts.truncation_mass, 1.0, 1e-12);
}

TEST(OracleTest, OneLagMeanByHand) {
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.3}), MarkDistribution::constant(1.0));
  const ExactLaws laws = enumerate_distribution(p, 2, 12);
  // E[N_2] = 0.2 + (0.2 + 0.3 * 0.2).
  EXPECT_NEAR(laws.counts.mean(), 0.46, 1e-9);
  const auto rec = exact_moment_recursion(p, 2);
  EXPECT_NEAR(laws.counts.mean(), rec[0].mean_Z + rec[1].mean_Z, 1e-9);
}

TEST(OracleTest, NoEventsProbability) {
  for (const auto& k : {ExcitationKernel::table({0.15, 0.05}), ExcitationKernel::geometric(0.1, 0.5),
                        ExcitationKernel::power_law(0.1, 2.0)}) {
    const ModelParams p = make_params(0.15, k, MarkDistribution::discrete({{1.0, 0.5}, {2.0, 0.5}}));
    for (std::int64_t t = 1; t <= 4; ++t) {
      const ExactLaws laws = enumerate_distribution(p, t, 12);
      EXPECT_NEAR(laws.counts.probability_of(0.0), std::exp(-0.15 * static_cast<double>(t)), 1e-12);
      EXPECT_NEAR(laws.marks.probability_of(0.0), std::exp(-0.15 * static_cast<double>(t)), 1e-12);
    }
  }
}

TEST(OracleTest, MeansMatchRecursion) {
  for (const ModelParams& p :
       {make_params(0.2, ExcitationKernel::table({0.3, 0.1}), MarkDistribution::constant(1.0)),
        make_params(0.3, ExcitationKernel::geometric(0.2, 0.5), MarkDistribution::discrete({{0.5, 0.4}, {2.0, 0.6}})),
        make_params(0.15, ExcitationKernel::table({0.2, 0.1, 0.05}), MarkDistribution::discrete({{1.0, 0.5}, {3.0, 0.5}}))}) {
    for (std::int64_t horizon = 1; horizon <= 3; ++horizon) {
      const ExactLaws laws = enumerate_distribution(p, horizon, 12);
      const auto rec = exact_moment_recursion(p, horizon);
      double n = 0.0;
      double l = 0.0;
      for (const auto& m : rec) {
        n += m.mean_Z;
        l += m.mean_X;
      }
      const double slack = 1e-9 + laws.counts.truncation_mass * 12.0 * static_cast<double>(horizon);
      EXPECT_NEAR(laws.counts.mean(), n, slack) << horizon;
      EXPECT_NEAR(laws.marks.mean(), l, slack * 3.0) << horizon;
      EXPECT_NEAR(laws.counts.total_probability() + laws.counts.truncation_mass, 1.0, 1e-12);
      EXPECT_NEAR(laws.marks.total_probability() + laws.marks.truncation_mass, 1.0, 1e-12);
      EXPECT_LT(laws.counts.truncation_mass, kOracleTruncationCap);
    }
  }
}

TEST(OracleTest, BruteForceTwoStepLaw) {
  // Independent two-step enumeration for Table{[a]} with unit marks:
  // P(N_2 = n) = sum_z1 Pois(z1; nu) Pois(n - z1; nu + a z1).
  const double nu = 0.3;
  const double a = 0.4;
  const ModelParams p = make_params(nu, ExcitationKernel::table({a}), MarkDistribution::constant(1.0));
  const ExactLaws laws = enumerate_distribution(p, 2, 12);
  auto pois = [](int k, double m) { return std::exp(k * std::log(m) - m - std::lgamma(k + 1.0)); };
  for (int n = 0; n <= 6; ++n) {
    double expected = 0.0;
    for (int z1 = 0; z1 <= n; ++z1) expected += pois(z1, nu) * pois(n - z1, nu + a * z1);
    EXPECT_NEAR(laws.counts.probability_of(n), expected, 1e-13) << n;
  }
}

TEST(OracleTest, ContinuousMarksGiveCountsOnly) {
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.1}), MarkDistribution::exponential(1.0));
  EXPECT_THROW(enumerate_distribution(p, 2, 10), InvalidParameter);
}

TEST(OracleTest, Limits) {
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.3}), MarkDistribution::constant(1.0));
  EXPECT_THROW(enumerate_distribution(p, 5, 10), InvalidParameter);
  EXPECT_THROW(enumerate_distribution(p, 2, 13), InvalidParameter);
  const ModelParams busy = make_params(3.0, ExcitationKernel::zero(), MarkDistribution::constant(1.0));
  EXPECT_THROW(enumerate_distribution(busy, 2, 4), TruncationTooCoarse);
}

TEST(OracleTest, ExactAgainstExactIsZero) {
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.3, 0.1}), MarkDistribution::constant(1.0));
  const ExactLaws laws = enumerate_distribution(p, 3, 10);
  EXPECT_EQ(tv_distance(laws.counts, laws.counts), 0.0);
}

TEST(OracleTest, EmpiricalLaw) {
  const std::vector<std::uint64_t> xs{0, 0, 1, 3};
  const ExactDistribution e = empirical_law(xs);
  EXPECT_DOUBLE_EQ(e.probability_of(0.0), 0.5);
  EXPECT_DOUBLE_EQ(e.probability_of(2.0), 0.0);
  EXPECT_DOUBLE_EQ(e.mean(), 1.0);
}

TEST(OracleTest, CrosscheckPasses) {
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.3, 0.1}), MarkDistribution::constant(1.0));
  const CrosscheckReport r = oracle_crosscheck(p, 2, 10, 200'000, 99);
  EXPECT_TRUE(r.passed) << r.tv_distance << " vs " << r.threshold;
  EXPECT_LT(r.tv_distance, 0.005);
}

TEST(OracleTest, CrosscheckDetectsPerturbedRate) {
  const ModelParams p = make_params(0.2, ExcitationKernel::table({0.3, 0.1}), MarkDistribution::constant(1.0));
  const ModelParams q = make_params(0.22, p.kernel, p.marks);
  const CrosscheckReport r = oracle_crosscheck(p, q, 3, 10, 1'000'000, 5);
  EXPECT_FALSE(r.passed) << r.tv_distance << " vs " << r.threshold;
}

}  // namespace
}  // namespace dthawkes
