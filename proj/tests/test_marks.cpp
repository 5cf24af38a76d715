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

#include <gtest/gtest.h>

#include "dthawkes/marks.hpp"
#include "dthawkes/random.hpp"

namespace dthawkes {
namespace {

TEST(MarksTest, ExponentialMoments) {
  const MarkMoments m = mark_moments(MarkDistribution::exponential(0.3));
  EXPECT_NEAR(m.mean, 10.0 / 3.0, 1e-14);
  EXPECT_NEAR(m.variance, 100.0 / 9.0, 1e-12);
  EXPECT_NEAR(m.second_raw, 200.0 / 9.0, 1e-12);
  EXPECT_NEAR(m.centered_fourth, 9.0 * std::pow(0.3, -4.0), 1e-9);
  ASSERT_TRUE(m.kurtosis.has_value());
  EXPECT_NEAR(*m.kurtosis, 9.0, 1e-12);
}

TEST(MarksTest, ConstantMoments) {
  const MarkMoments m = mark_moments(MarkDistribution::constant(1.0));
  EXPECT_EQ(m.mean, 1.0);
  EXPECT_EQ(m.variance, 0.0);
  EXPECT_EQ(m.second_raw, 1.0);
  EXPECT_FALSE(m.kurtosis.has_value());
}

TEST(MarksTest, DiscreteMoments) {
  const MarkMoments m = mark_moments(MarkDistribution::discrete({{1.0, 0.5}, {3.0, 0.5}}));
  EXPECT_NEAR(m.mean, 2.0, 1e-15);
  EXPECT_NEAR(m.variance, 1.0, 1e-15);
  EXPECT_NEAR(m.second_raw, 5.0, 1e-15);
  ASSERT_TRUE(m.kurtosis.has_value());
  EXPECT_NEAR(*m.kurtosis, 1.0, 1e-15);
}

TEST(MarksTest, MomentConsistency) {
  for (const auto& d : {MarkDistribution::exponential(0.3), MarkDistribution::exponential(2.0),
                        MarkDistribution::constant(2.5),
                        MarkDistribution::discrete({{0.5, 0.2}, {1.0, 0.3}, {4.0, 0.5}})}) {
    const MarkMoments& m = d.moments();
    EXPECT_NEAR(m.variance, m.second_raw - m.mean * m.mean, 1e-12 * std::max(1.0, m.second_raw))
        << d.describe();
    EXPECT_GE(m.centered_fourth, m.variance * m.variance * (1.0 - 1e-12)) << d.describe();
  }
}

TEST(MarksTest, SampleMeanWithinFourStandardErrors) {
  constexpr int kDraws = 1'000'000;
  for (const auto& d : {MarkDistribution::exponential(0.3),
                        MarkDistribution::discrete({{1.0, 0.5}, {3.0, 0.5}}),
                        MarkDistribution::discrete({{0.5, 0.2}, {1.0, 0.3}, {4.0, 0.5}})}) {
    double sum = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      StepStream stream(11, static_cast<std::uint64_t>(i), 1, StreamDomain::kTest);
      const double x = d.sample(stream);
      ASSERT_GT(x, 0.0);
      sum += x;
    }
    const double se = std::sqrt(d.moments().variance / kDraws);
    EXPECT_NEAR(sum / kDraws, d.mean(), 4.0 * se) << d.describe();
  }
}

TEST(MarksTest, DiscreteFrequencies) {
  const auto d = MarkDistribution::discrete({{0.5, 0.2}, {1.0, 0.3}, {4.0, 0.5}});
  constexpr int kDraws = 200'000;
  std::map<double, int> counts;
  for (int i = 0; i < kDraws; ++i) {
    StepStream stream(12, static_cast<std::uint64_t>(i), 1, StreamDomain::kTest);
    ++counts[d.sample(stream)];
  }
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& a : d.atoms()) {
    const double se = std::sqrt(a.probability * (1.0 - a.probability) / kDraws);
    EXPECT_NEAR(counts[a.value] / static_cast<double>(kDraws), a.probability, 4.0 * se);
  }
}

TEST(MarksTest, SampleTotalOfZeroIsZero) {
  StepStream stream(1, 0, 1);
  EXPECT_EQ(MarkDistribution::exponential(1.0).sample_total(stream, 0), 0.0);
  EXPECT_EQ(stream.draws(), 0u);
  EXPECT_EQ(MarkDistribution::constant(2.0).sample_total(stream, 3), 6.0);
}

TEST(MarksTest, ConstantIsDiscreteWithOneAtom) {
  const auto d = MarkDistribution::constant(2.0);
  EXPECT_TRUE(d.is_discrete());
  ASSERT_EQ(d.atoms().size(), 1u);
  EXPECT_EQ(d.atoms()[0].value, 2.0);
  EXPECT_FALSE(MarkDistribution::exponential(1.0).is_discrete());
}

TEST(MarksTest, RejectsMalformedLaws) {
  EXPECT_THROW(MarkDistribution::constant(0.0), InvalidParameter);
  EXPECT_THROW(MarkDistribution::exponential(-1.0), InvalidParameter);
  EXPECT_THROW(MarkDistribution::discrete({}), InvalidParameter);
  EXPECT_THROW(MarkDistribution::discrete({{1.0, 0.5}, {2.0, 0.4}}), InvalidParameter);
  EXPECT_THROW(MarkDistribution::discrete({{-1.0, 0.5}, {2.0, 0.5}}), InvalidParameter);
}

}  // namespace
}  // namespace dthawkes
