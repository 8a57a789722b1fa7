// Copyright 2026 The ipmcmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ipmcmc/engine.hpp"
#include "ipmcmc/errors.hpp"
#include "ipmcmc/random.hpp"
#include "ipmcmc/switching.hpp"

namespace ipmcmc {
namespace {

// Each slot keeps its node with probability 1 / (M - P + 1) when all weights are equal.
double equal_weight_oracle(std::size_t m, std::size_t p) {
  return 1.0 - std::pow(1.0 / static_cast<double>(m - p + 1), static_cast<double>(p));
}

TEST(SwitchingEqualWeights, KnownValues) {
  EXPECT_EQ(switch_probability_equal_weights(5, 5), 0.0);
  EXPECT_NEAR(switch_probability_equal_weights(2, 1), 0.5, 1e-15);
  EXPECT_NEAR(switch_probability_equal_weights(4, 2), 8.0 / 9.0, 1e-15);
  for (std::size_t m = 1; m <= 12; ++m) {
    for (std::size_t p = 1; p <= m; ++p) {
      EXPECT_NEAR(switch_probability_equal_weights(m, p), equal_weight_oracle(m, p), 1e-14);
    }
  }
}

TEST(SwitchingEqualWeights, NondecreasingInNodes) {
  for (std::size_t p = 1; p <= 6; ++p) {
    for (std::size_t m = p; m < 30; ++m) {
      EXPECT_LE(switch_probability_equal_weights(m, p), switch_probability_equal_weights(m + 1, p));
    }
  }
}

TEST(SwitchingMonteCarlo, SmallSigmaMatchesEqualWeights) {
  const RandomStream rng(21);
  for (const std::size_t p : {1U, 3U, 5U}) {
    const auto est = switch_probability_lognormal_mc({1e-6}, 6, p, 20000, rng);
    const double exact = switch_probability_equal_weights(6, p);
    EXPECT_NEAR(est.probability, exact, 3.0 * std::sqrt(exact * (1.0 - exact) / 20000.0) + 1e-12);
  }
}

TEST(SwitchingMonteCarlo, StandardErrorShrinks) {
  const RandomStream rng(22);
  const auto small = switch_probability_lognormal_mc({3.0}, 8, 2, 2000, rng);
  const auto large = switch_probability_lognormal_mc({3.0}, 8, 2, 32000, rng);
  EXPECT_EQ(small.trials, 2000U);
  EXPECT_LT(large.standard_error, small.standard_error / 2.0);
}

TEST(SwitchingMonteCarlo, IndependentOfWorkers) {
  const RandomStream rng(23);
  const auto a = switch_probability_lognormal_mc({3.0}, 8, 4, 5000, rng, 1);
  const auto b = switch_probability_lognormal_mc({3.0}, 8, 4, 5000, rng, 3);
  EXPECT_EQ(a.probability, b.probability);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(SwitchingMonteCarlo, CurvePeaksInTheInterior) {
  const auto curve = switching_curve({3.0}, 8, 20000, RandomStream(24));
  ASSERT_EQ(curve.size(), 8U);
  EXPECT_EQ(curve.back().probability, 0.0);
  EXPECT_GT(curve[3].probability, curve[0].probability);
  EXPECT_GT(curve[3].probability, curve[6].probability);
}

TEST(NoSwitchProbability, MatchesGibbsLoopFrequency) {
  const std::vector<double> log_z{0.0, 1.5, -0.7, 0.3, 2.0};
  const std::vector<std::size_t> conditional{1, 3};
  const double exact = no_switch_probability(log_z, conditional);
  RandomStream rng(25);
  const std::size_t n = 100000;
  std::size_t stays = 0;
  for (std::size_t k = 0; k < n; ++k) {
    stays += gibbs_update_indices(log_z, conditional, rng) == conditional ? 1U : 0U;
  }
  const double freq = static_cast<double>(stays) / static_cast<double>(n);
  EXPECT_NEAR(freq, exact, 4.0 * std::sqrt(exact * (1.0 - exact) / static_cast<double>(n)));
}

TEST(NoSwitchProbability, EdgeCases) {
  const std::vector<double> log_z{0.0, 0.0, 0.0};
  EXPECT_EQ(no_switch_probability(log_z, std::vector<std::size_t>{0, 1, 2}), 1.0);
  EXPECT_NEAR(no_switch_probability(log_z, std::vector<std::size_t>{2}), 1.0 / 3.0, 1e-15);
  EXPECT_THROW((void)no_switch_probability(log_z, std::vector<std::size_t>{1, 1}), IndexOutOfRange);
  EXPECT_THROW((void)no_switch_probability(log_z, std::vector<std::size_t>{3}), IndexOutOfRange);
}

TEST(EmpiricalSwitchRate, SwitchesOverIterations) {
  ChainSummary summary;
  summary.iterations = 40;
  summary.switches = 10;
  EXPECT_DOUBLE_EQ(empirical_switch_rate(summary), 0.25);
}

}  // namespace
}  // namespace ipmcmc
