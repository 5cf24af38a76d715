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
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "dthawkes/poisson.hpp"
#include "dthawkes/random.hpp"
#include "support/oracles.hpp"

namespace dthawkes {
namespace {

// Pearson chi-square p-value of `draws` Poisson(mean) variates against the
// exact pmf, pooling cells with expected count below 5.
double poisson_chi_square_p(double mean, int draws, std::uint64_t seed) {
  const int kmax = static_cast<int>(mean + 20.0 * std::sqrt(mean) + 30.0);
  std::vector<double> observed(static_cast<std::size_t>(kmax) + 2, 0.0);
  for (int i = 0; i < draws; ++i) {
    StepStream s(seed, static_cast<std::uint64_t>(i), 1, StreamDomain::kTest);
    const std::uint64_t k = sample_poisson(s, mean);
    observed[std::min<std::size_t>(k, static_cast<std::size_t>(kmax) + 1)] += 1.0;
  }
  const std::vector<double> p = testsupport::poisson_probabilities(mean, kmax);
  double covered = 0.0;
  for (double q : p) covered += q;
  std::vector<double> expected(p.size() + 1);
  for (std::size_t k = 0; k < p.size(); ++k) expected[k] = draws * p[k];
  expected.back() = draws * std::max(0.0, 1.0 - covered);

  double chi2 = 0.0;
  int cells = 0;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= 5.0) {
      chi2 += (o - e) * (o - e) / e;
      ++cells;
      o = e = 0.0;
    }
  }
  if (e > 0.0) chi2 += (o - e) * (o - e) / e, ++cells;
  return boost::math::gamma_q(0.5 * (cells - 1), 0.5 * chi2);
}

TEST(PoissonTest, ChiSquareAcrossRegimes) {
  std::uint64_t seed = 100;
  for (double mean : {0.05, 0.5, 3.0, 9.99, 10.0, 17.5, 60.0, 1000.0}) {
    const double p = poisson_chi_square_p(mean, 200'000, seed++);
    EXPECT_GT(p, 1e-3) << "mean=" << mean;
  }
}

TEST(PoissonTest, MeanAndVariance) {
  for (double mean : {0.15, 4.0, 12.0, 250.0}) {
    constexpr int kDraws = 400'000;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      StepStream st(77, static_cast<std::uint64_t>(i), 2, StreamDomain::kTest);
      const auto k = static_cast<double>(sample_poisson(st, mean));
      s1 += k;
      s2 += k * k;
    }
    const double m = s1 / kDraws;
    const double v = s2 / kDraws - m * m;
    EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / kDraws)) << mean;
    // Var of the sample variance is about (mu + 2 mu^2) / n.
    EXPECT_NEAR(v, mean, 5.0 * std::sqrt((mean + 2.0 * mean * mean) / kDraws)) << mean;
  }
}

TEST(PoissonTest, NonPositiveMeanGivesZeroWithoutDraws) {
  StepStream s(1, 0, 1);
  EXPECT_EQ(sample_poisson(s, 0.0), 0u);
  EXPECT_EQ(sample_poisson(s, -1.0), 0u);
  EXPECT_EQ(s.draws(), 0u);
}

TEST(PoissonTest, InversionUsesOneDraw) {
  StepStream s(1, 0, 1);
  sample_poisson(s, 9.5);
  EXPECT_EQ(s.draws(), 1u);
}

TEST(PoissonTest, LogFactorialMatchesLgamma) {
  for (std::uint64_t k : {0ull, 1ull, 2ull, 10ull, 170ull, 255ull, 256ull, 257ull, 1000ull, 123456ull}) {
    const double ref = std::lgamma(static_cast<double>(k) + 1.0);
    EXPECT_NEAR(log_factorial(k), ref, 1e-13 * std::max(1.0, ref)) << k;
  }
}

TEST(PoissonTest, PmfSumsToOne) {
  for (double mean : {0.4, 12.0, 300.0}) {
    double total = 0.0;
    for (std::uint64_t k = 0; k < 2000; ++k) total += poisson_pmf(k, mean);
    EXPECT_NEAR(total, 1.0, 1e-12) << mean;
  }
  EXPECT_NEAR(poisson_pmf(0, 0.4), std::exp(-0.4), 1e-16);
}

}  // namespace
}  // namespace dthawkes
