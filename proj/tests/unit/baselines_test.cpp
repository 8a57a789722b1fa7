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

#include "capture.hpp"
#include "fixtures.hpp"
#include "ipmcmc/baselines.hpp"
#include "ipmcmc/errors.hpp"
#include "ipmcmc/estimators.hpp"
#include "ipmcmc/smc.hpp"
#include "oracles.hpp"

namespace ipmcmc {
namespace {

PoolConfig chains(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
  PoolConfig config;
  config.nodes = m;
  config.conditional = m;
  config.particles = n;
  config.iterations = r;
  config.seed = seed;
  return config;
}

PimhState start(const StateSpaceModel& model, const Observations& obs, std::size_t n, RandomStream& rng) {
  auto sweep = std::make_shared<const SweepResult>(smc_sweep(model, obs, n, rng));
  auto selection = select_retained(*sweep, rng);
  return {selection.trajectory, sweep->log_evidence(), selection.index, sweep};
}

std::vector<std::size_t> chain_counts(const testing::HmmProblem& problem, const testing::CaptureSink& sink,
                                      std::size_t stage) {
  auto counts = problem.empty_counts();
  for (const auto& record : sink.records) {
    if (record.initialization || record.stage != stage) {
      continue;
    }
    for (const auto& path : record.retained) {
      ++counts[problem.index(path)];
    }
  }
  return counts;
}

TEST(SamplerKind, RoundTripsNames) {
  for (const auto kind : {SamplerKind::ipmcmc, SamplerKind::mpg, SamplerKind::mpimh, SamplerKind::mapg,
                          SamplerKind::smc, SamplerKind::pg, SamplerKind::pimh}) {
    EXPECT_EQ(parse_sampler_kind(to_string(kind)), kind);
  }
  EXPECT_THROW((void)parse_sampler_kind("gibbs"), InvalidConfig);
}

TEST(PgStep, PinnedIndexKeepsRetainedPath) {
  const testing::ScalarProblem problem(8);
  RandomStream rng(1);
  auto retained = start(problem.model, problem.observations, 4, rng).trajectory;
  int pinned = 0;
  for (int k = 0; k < 500; ++k) {
    const auto step = pg_step(retained, problem.model, problem.observations, 2, rng);
    if (step.selection.index == 1) {
      EXPECT_EQ(step.selection.trajectory, retained);
      ++pinned;
    }
    retained = step.selection.trajectory;
  }
  EXPECT_GT(pinned, 0);
}

TEST(PgStep, LeavesHmmPosteriorInvariant) {
  const testing::HmmProblem problem;
  testing::CaptureSink sink(false);
  ChainSink* sinks[] = {&sink};
  (void)run_sampler(SamplerKind::pg, chains(1, 5, 100000, 2), problem.model, problem.observations, sinks);
  EXPECT_LE(testing::tv_distance(chain_counts(problem, sink, 0), problem.exact.path_probabilities), 0.02);
}

TEST(PgStep, SingleChainEqualsSingleNodePool) {
  const testing::ScalarProblem problem(10);
  testing::CaptureSink pg_sink(false);
  testing::CaptureSink pool_sink(false);
  ChainSink* pg_sinks[] = {&pg_sink};
  ChainSink* pool_sinks[] = {&pool_sink};
  (void)run_sampler(SamplerKind::pg, chains(1, 10, 50, 3), problem.model, problem.observations, pg_sinks);
  (void)run_sampler(SamplerKind::ipmcmc, chains(1, 10, 50, 3), problem.model, problem.observations, pool_sinks);
  ASSERT_EQ(pg_sink.records.size(), pool_sink.records.size());
  for (std::size_t k = 0; k < pg_sink.records.size(); ++k) {
    EXPECT_EQ(pg_sink.records[k].retained, pool_sink.records[k].retained);
    EXPECT_EQ(pg_sink.records[k].log_evidence, pool_sink.records[k].log_evidence);
  }
}

TEST(MetropolisAccept, RatioAboveOneAlwaysAccepts) {
  RandomStream rng(4);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_TRUE(metropolis_accept(0.0, rng));
    EXPECT_TRUE(metropolis_accept(3.5, rng));
  }
}

TEST(MetropolisAccept, HalfRatioAcceptsHalfTheTime) {
  RandomStream rng(5);
  const std::size_t trials = 100000;
  std::size_t accepted = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    accepted += metropolis_accept(std::log(0.5), rng) ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(accepted) / trials, 0.5, 4.0 * std::sqrt(0.25 / trials));
}

TEST(MetropolisAccept, RejectsNaN) {
  RandomStream rng(6);
  EXPECT_THROW((void)metropolis_accept(std::nan(""), rng), InvalidWeight);
}

TEST(PimhStep, LeavesHmmPosteriorInvariant) {
  const testing::HmmProblem problem;
  testing::CaptureSink sink(false);
  ChainSink* sinks[] = {&sink};
  const auto summary =
      run_sampler(SamplerKind::pimh, chains(1, 5, 100000, 7), problem.model, problem.observations, sinks);
  EXPECT_LE(testing::tv_distance(chain_counts(problem, sink, 0), problem.exact.path_probabilities), 0.02);
  EXPECT_GT(summary.acceptance_rate(), 0.0);
  EXPECT_LT(summary.acceptance_rate(), 1.0);
}

TEST(ApgStep, ForcedRejectionReducesToPg) {
  const testing::ScalarProblem problem(8);
  RandomStream init(8);
  auto state = start(problem.model, problem.observations, 6, init);
  for (std::uint64_t k = 0; k < 20; ++k) {
    RandomStream rng = RandomStream(9).derive("step", k);
    ApgOptions options;
    options.force_reject = true;
    const auto apg = apg_step(state, problem.model, problem.observations, 6, rng, options);
    RandomStream pg_rng = rng.derive("pg");
    const auto pg = pg_step(state.trajectory, problem.model, problem.observations, 6, pg_rng);
    EXPECT_EQ(apg.after_pimh.trajectory, pg.selection.trajectory);
    EXPECT_EQ(apg.accepted, std::optional<bool>(false));
    state = apg.after_pimh;
  }
}

TEST(ApgStep, SkippedPgReducesToPimh) {
  const testing::ScalarProblem problem(8);
  RandomStream init(10);
  auto state = start(problem.model, problem.observations, 6, init);
  for (std::uint64_t k = 0; k < 20; ++k) {
    RandomStream rng = RandomStream(11).derive("step", k);
    ApgOptions options;
    options.run_pg = false;
    const auto apg = apg_step(state, problem.model, problem.observations, 6, rng, options);
    RandomStream pimh_rng = rng.derive("pimh");
    const auto pimh = pimh_step(state, problem.model, problem.observations, 6, pimh_rng);
    EXPECT_EQ(apg.after_pimh.trajectory, pimh.state.trajectory);
    EXPECT_EQ(apg.after_pimh.log_evidence, pimh.state.log_evidence);
    EXPECT_EQ(apg.accepted, std::optional<bool>(pimh.accepted));
    state = apg.after_pimh;
  }
}

TEST(ApgStep, LeavesHmmPosteriorInvariant) {
  const testing::HmmProblem problem;
  testing::CaptureSink sink(false);
  ChainSink* sinks[] = {&sink};
  (void)run_sampler(SamplerKind::mapg, chains(1, 5, 100000, 12), problem.model, problem.observations, sinks);
  EXPECT_LE(testing::tv_distance(chain_counts(problem, sink, 1), problem.exact.path_probabilities), 0.02);
  EXPECT_LE(testing::tv_distance(chain_counts(problem, sink, 0), problem.exact.path_probabilities), 0.02);
}

TEST(MultiStart, SingleChainMatchesUnderlyingSampler) {
  const testing::ScalarProblem problem(6);
  for (const auto [multi, single] :
       {std::pair{SamplerKind::mpg, SamplerKind::pg}, std::pair{SamplerKind::mpimh, SamplerKind::pimh}}) {
    testing::CaptureSink a(false);
    testing::CaptureSink b(false);
    ChainSink* sa[] = {&a};
    ChainSink* sb[] = {&b};
    (void)run_sampler(multi, chains(1, 8, 30, 13), problem.model, problem.observations, sa);
    (void)run_sampler(single, chains(1, 8, 30, 13), problem.model, problem.observations, sb);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
      EXPECT_EQ(a.records[k].retained, b.records[k].retained);
    }
  }
}

TEST(MultiStart, ChainsDiffer) {
  const testing::ScalarProblem problem(6);
  testing::CaptureSink sink(false);
  ChainSink* sinks[] = {&sink};
  (void)run_sampler(SamplerKind::mpg, chains(3, 8, 5, 14), problem.model, problem.observations, sinks);
  const auto& last = sink.records.back();
  EXPECT_NE(last.retained[0], last.retained[1]);
  EXPECT_NE(last.retained[1], last.retained[2]);
}

TEST(MultiStart, MpgEqualsFullPoolWithMatchedSeeds) {
  const testing::ScalarProblem problem(12);
  testing::CaptureSink mpg(true);
  testing::CaptureSink full(true);
  ChainSink* sa[] = {&mpg};
  ChainSink* sb[] = {&full};
  (void)run_sampler(SamplerKind::mpg, chains(4, 10, 40, 15), problem.model, problem.observations, sa);
  (void)run_sampler(SamplerKind::ipmcmc, chains(4, 10, 40, 15), problem.model, problem.observations, sb);
  ASSERT_EQ(mpg.records.size(), full.records.size());
  const auto f = TestFunction::marginal_powers(12, 1, 2);
  RunningMean rb_mpg(f.output_dim());
  RunningMean rb_full(f.output_dim());
  for (std::size_t k = 0; k < mpg.records.size(); ++k) {
    const auto& a = mpg.records[k];
    const auto& b = full.records[k];
    EXPECT_EQ(a.conditional, b.conditional);
    EXPECT_EQ(a.retained, b.retained);
    EXPECT_EQ(a.retained_index, b.retained_index);
    EXPECT_EQ(a.log_evidence, b.log_evidence);
    EXPECT_EQ(a.zeta, b.zeta);
    rb_mpg.add(rao_blackwellized_estimate(a.sweeps, a.zeta, 4, f));
    rb_full.add(rao_blackwellized_estimate(b.sweeps, b.zeta, 4, f));
  }
  EXPECT_EQ(rb_mpg.mean(), rb_full.mean());
}

TEST(MultiStart, AlternatingSamplerEmitsTwoStages) {
  const testing::ScalarProblem problem(5);
  testing::CaptureSink sink(false);
  ChainSink* sinks[] = {&sink};
  const auto summary =
      run_sampler(SamplerKind::mapg, chains(2, 8, 10, 16), problem.model, problem.observations, sinks);
  std::size_t stage0 = 0;
  std::size_t stage1 = 0;
  for (const auto& record : sink.records) {
    if (record.initialization) {
      continue;
    }
    if (record.stage == 0) {
      ++stage0;
      EXPECT_TRUE(record.accepted.empty());
    } else {
      ++stage1;
      EXPECT_EQ(record.accepted.size(), 2U);
    }
  }
  EXPECT_EQ(stage0, 10U);
  EXPECT_EQ(stage1, 10U);
  EXPECT_EQ(summary.mh_tests, 20U);
}

TEST(MultiStart, IndependentSmcHasNoMetropolisTest) {
  const testing::ScalarProblem problem(5);
  testing::CaptureSink sink(false);
  ChainSink* sinks[] = {&sink};
  const auto summary =
      run_sampler(SamplerKind::smc, chains(3, 8, 4, 17), problem.model, problem.observations, sinks);
  EXPECT_EQ(summary.mh_tests, 0U);
  EXPECT_EQ(sink.records.size(), 5U);
}

TEST(MultiStart, SingleChainKindsNeedOneNode) {
  const testing::ScalarProblem problem(5);
  EXPECT_THROW((void)run_sampler(SamplerKind::pg, chains(2, 8, 4, 1), problem.model, problem.observations, {}),
               InvalidConfig);
}

}  // namespace
}  // namespace ipmcmc
