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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/log_weights.hpp"
#include "ipmcmc/random.hpp"
#include "oracles.hpp"

namespace ipmcmc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(NormalizeLogWeights, EqualEntriesAreUniform) {
  const std::vector<double> lw{0.0, 0.0, 0.0};
  for (const double p : normalize_log_weights(lw)) {
    EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  }
}

TEST(NormalizeLogWeights, ProportionalToWeights) {
  const std::vector<double> lw{std::log(1.0), std::log(2.0), std::log(3.0)};
  const auto p = normalize_log_weights(lw);
  EXPECT_NEAR(p[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(p[2], 3.0 / 6.0, 1e-15);
}

TEST(NormalizeLogWeights, HugeNegativeEntryDoesNotOverflow) {
  const std::vector<double> lw{-1e300, 0.0};
  const auto p = normalize_log_weights(lw);
  const auto oracle = testing::normalize_extended(lw);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[1], 1.0);
  EXPECT_EQ(p[0], static_cast<double>(oracle[0]));
  EXPECT_EQ(p[1], static_cast<double>(oracle[1]));
}

TEST(NormalizeLogWeights, NegativeInfinityMapsToExactZero) {
  const std::vector<double> lw{-kInf, 1.0, -kInf, 2.0};
  const auto p = normalize_log_weights(lw);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_NEAR(p[1] + p[3], 1.0, 1e-15);
}

TEST(NormalizeLogWeights, RejectsBadInput) {
  EXPECT_THROW((void)normalize_log_weights(std::vector<double>{-kInf, -kInf}), AllZeroWeights);
  EXPECT_THROW((void)normalize_log_weights(std::vector<double>{0.0, std::nan("")}), InvalidWeight);
  EXPECT_THROW((void)normalize_log_weights(std::vector<double>{0.0, kInf}), InvalidWeight);
  EXPECT_THROW((void)log_mean_exp(std::vector<double>{-kInf}), AllZeroWeights);
  EXPECT_THROW((void)log_mean_exp(std::vector<double>{kInf}), InvalidWeight);
}

TEST(NormalizeLogWeights, MatchesExtendedPrecisionAndIsShiftInvariant) {
  RandomStream rng(11);
  std::vector<double> lw(100);
  for (auto& w : lw) {
    w = 20.0 * rng.normal();
  }
  const auto p = normalize_log_weights(lw);
  const auto oracle = testing::normalize_extended(lw);
  double total = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    EXPECT_NEAR(p[i], static_cast<double>(oracle[i]), 1e-14);
    total += p[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (const double shift : {-1e6, -3.5, 7.25, 1e5}) {
    auto shifted = lw;
    for (auto& w : shifted) {
      w += shift;
    }
    const auto q = normalize_log_weights(shifted);
    for (std::size_t i = 0; i < lw.size(); ++i) {
      EXPECT_NEAR(q[i], p[i], 1e-12);
    }
  }
}

TEST(LogMeanExp, ConstantAndArithmeticCases) {
  const std::vector<double> constant(7, -3.25);
  EXPECT_NEAR(log_mean_exp(constant), -3.25, 1e-15);
  EXPECT_NEAR(log_mean_exp(std::vector<double>{std::log(1.0), std::log(3.0)}), std::log(2.0), 1e-15);
}

TEST(LogMeanExp, MatchesExtendedPrecisionSummation) {
  RandomStream rng(5);
  std::vector<double> lw(100);
  for (auto& w : lw) {
    w = 3.0 * rng.normal();
  }
  const double value = log_mean_exp(lw);
  const auto oracle = static_cast<double>(testing::log_mean_exp_extended(lw));
  EXPECT_NEAR(value, oracle, 1e-12 * std::abs(oracle));
}

TEST(LogMeanExp, ShiftEquivariant) {
  RandomStream rng(6);
  std::vector<double> lw(50);
  for (auto& w : lw) {
    w = rng.normal();
  }
  const double base = log_mean_exp(lw);
  for (const double c : {-800.0, 12.0, 900.0}) {
    auto shifted = lw;
    for (auto& w : shifted) {
      w += c;
    }
    EXPECT_NEAR(log_mean_exp(shifted), base + c, 1e-12 * std::max(1.0, std::abs(c)));
  }
}

TEST(LogSumExp, SingleFiniteEntry) {
  EXPECT_EQ(log_sum_exp(std::vector<double>{-kInf, 4.0, -kInf}), 4.0);
}

}  // namespace
}  // namespace ipmcmc
