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

#include "ipmcmc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <string>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/log_weights.hpp"
#include "ipmcmc/smc.hpp"
#include "parallel.hpp"

namespace ipmcmc {

namespace {

constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();

std::vector<double> degenerate_zeta(std::span<const std::size_t> conditional, std::size_t nodes) {
  std::vector<double> zeta(conditional.size() * nodes, 0.0);
  for (std::size_t j = 0; j < conditional.size(); ++j) {
    zeta[j * nodes + conditional[j]] = 1.0;
  }
  return zeta;
}

void check_conditional(std::span<const std::size_t> conditional, std::size_t nodes) {
  std::vector<char> seen(nodes, 0);
  for (const auto c : conditional) {
    if (c >= nodes) {
      throw IndexOutOfRange("conditional node " + std::to_string(c) + " outside [0, " +
                            std::to_string(nodes) + ")");
    }
    if (seen[c] != 0) {
      throw IndexOutOfRange("conditional node " + std::to_string(c) + " held by two slots");
    }
    seen[c] = 1;
  }
}

void fill_gibbs_row(std::span<const double> log_evidence, std::span<const char> held, std::size_t own,
                    std::span<double> scratch, std::span<double> row) {
  for (std::size_t m = 0; m < log_evidence.size(); ++m) {
    scratch[m] = (held[m] == 0 || m == own) ? log_evidence[m] : -std::numeric_limits<double>::infinity();
  }
  normalize_log_weights(scratch, row);
}

}  // namespace

void PoolConfig::validate() const {
  if (nodes < 1) {
    throw InvalidConfig("sampler.nodes", "must be at least 1");
  }
  if (conditional < 1 || conditional > nodes) {
    throw InvalidConfig("sampler.conditional", "must lie in [1, nodes]");
  }
  if (particles < 2) {
    throw InvalidConfig("sampler.particles", "must be at least 2");
  }
  if (iterations < 1) {
    throw InvalidConfig("sampler.iterations", "must be at least 1");
  }
  if (workers < 1) {
    throw InvalidConfig("sampler.workers", "must be at least 1");
  }
}

RandomStream node_stream(const RandomStream& root, std::size_t node, std::size_t iteration) {
  return root.derive("node", node).derive("iteration", iteration);
}

RandomStream coordinator_stream(const RandomStream& root, std::size_t iteration) {
  return root.derive("coordinator", iteration);
}

std::size_t ExchangeCounts::scalars() const {
  return std::accumulate(scalars_per_node.begin(), scalars_per_node.end(), std::size_t{0});
}

double MessageLedger::receive_evidence(std::size_t node, const SweepResult& sweep) {
  ++counts_.scalars_per_node.at(node);
  return sweep.log_evidence();
}

Trajectory MessageLedger::fetch_trajectory(std::size_t /*node*/, const SweepResult& sweep,
                                           std::size_t final_index) {
  ++counts_.trajectories;
  return extract_trajectory(sweep, final_index).trajectory;
}

bool operator==(const PoolState& a, const PoolState& b) {
  if (a.sweeps.size() != b.sweeps.size()) {
    return false;
  }
  for (std::size_t m = 0; m < a.sweeps.size(); ++m) {
    const auto& x = a.sweeps[m];
    const auto& y = b.sweeps[m];
    if ((x == nullptr) != (y == nullptr) || (x != nullptr && !(*x == *y))) {
      return false;
    }
  }
  return a.iteration == b.iteration && a.candidates == b.candidates && a.conditional == b.conditional &&
         a.retained_index == b.retained_index && a.retained == b.retained && a.zeta == b.zeta &&
         a.exchange == b.exchange;
}

GibbsWeights gibbs_weights(std::span<const double> log_evidence, std::span<const std::size_t> conditional,
                           std::size_t slot) {
  const std::size_t nodes = log_evidence.size();
  check_conditional(conditional, nodes);
  if (slot >= conditional.size()) {
    throw IndexOutOfRange("slot outside [0, P)");
  }
  std::vector<char> held(nodes, 0);
  for (const auto c : conditional) {
    held[c] = 1;
  }
  std::vector<double> scratch(nodes);
  GibbsWeights out{std::vector<double>(nodes)};
  fill_gibbs_row(log_evidence, held, conditional[slot], scratch, out.zeta);
  return out;
}

std::vector<std::size_t> gibbs_update_indices(std::span<const double> log_evidence,
                                              std::span<const std::size_t> conditional, RandomStream& rng,
                                              std::span<double> zeta_out) {
  const std::size_t nodes = log_evidence.size();
  const std::size_t slots = conditional.size();
  check_conditional(conditional, nodes);
  if (!zeta_out.empty() && zeta_out.size() != slots * nodes) {
    throw DimensionMismatch("zeta output must hold P x M entries");
  }
  std::vector<std::size_t> c(conditional.begin(), conditional.end());
  std::vector<char> held(nodes, 0);
  for (const auto m : c) {
    held[m] = 1;
  }
  std::vector<double> scratch(nodes);
  std::vector<double> row(nodes);
  for (std::size_t j = 0; j < slots; ++j) {
    fill_gibbs_row(log_evidence, held, c[j], scratch, row);
    if (!zeta_out.empty()) {
      std::copy(row.begin(), row.end(), zeta_out.begin() + static_cast<std::ptrdiff_t>(j * nodes));
    }
    held[c[j]] = 0;
    c[j] = rng.categorical(row);
    held[c[j]] = 1;
  }
  return c;
}

Selection select_retained(const SweepResult& sweep, RandomStream& rng) {
  const auto weights = final_weights(sweep);
  const std::size_t index = rng.categorical(weights);
  auto path = extract_trajectory(sweep, index);
  return {index, std::move(path.trajectory), std::move(path.lineage)};
}

PoolState init_pool(const PoolConfig& config, const StateSpaceModel& model, const Observations& observations,
                    const RandomStream& root) {
  config.validate();
  const std::size_t nodes = config.nodes;
  PoolState state;
  state.sweeps.resize(nodes);
  state.candidates.resize(nodes);
  detail::for_each_index(nodes, config.workers, [&](std::size_t m) {
    auto rng = node_stream(root, m, 0);
    auto sweep = std::make_shared<const SweepResult>(smc_sweep(model, observations, config.particles, rng));
    state.candidates[m] = rng.categorical(final_weights(*sweep));
    state.sweeps[m] = std::move(sweep);
  });

  MessageLedger ledger(nodes);
  for (std::size_t m = 0; m < nodes; ++m) {
    (void)ledger.receive_evidence(m, *state.sweeps[m]);
  }
  state.conditional.resize(config.conditional);
  std::iota(state.conditional.begin(), state.conditional.end(), std::size_t{0});
  for (const auto m : state.conditional) {
    state.retained_index.push_back(state.candidates[m]);
    state.retained.push_back(ledger.fetch_trajectory(m, *state.sweeps[m], state.candidates[m]));
  }
  state.zeta = degenerate_zeta(state.conditional, nodes);
  state.exchange = ledger.counts();
  return state;
}

PoolState init_pool_from(const PoolConfig& config, std::vector<Trajectory> retained) {
  config.validate();
  if (retained.size() != config.conditional) {
    throw InvalidConfig("sampler.warm_start", "needs exactly one trajectory per conditional slot");
  }
  PoolState state;
  state.conditional.resize(config.conditional);
  std::iota(state.conditional.begin(), state.conditional.end(), std::size_t{0});
  state.retained_index.assign(config.conditional, 0);
  state.retained = std::move(retained);
  state.exchange.scalars_per_node.assign(config.nodes, 0);
  return state;
}

PoolState ipmcmc_step(const PoolState& state, const StateSpaceModel& model, const Observations& observations,
                      const PoolConfig& config, const RandomStream& root) {
  const std::size_t nodes = config.nodes;
  const std::size_t slots = config.conditional;
  if (state.conditional.size() != slots || state.retained.size() != slots) {
    throw DimensionMismatch("pool state does not match the configured number of slots");
  }
  check_conditional(state.conditional, nodes);

  std::vector<std::size_t> slot_of(nodes, kNoSlot);
  for (std::size_t j = 0; j < slots; ++j) {
    slot_of[state.conditional[j]] = j;
  }

  PoolState next;
  next.iteration = state.iteration + 1;
  next.sweeps.resize(nodes);
  next.candidates.resize(nodes);
  detail::for_each_index(nodes, config.workers, [&](std::size_t m) {
    auto rng = node_stream(root, m, next.iteration);
    const std::size_t j = slot_of[m];
    auto sweep = std::make_shared<const SweepResult>(
        j == kNoSlot ? smc_sweep(model, observations, config.particles, rng)
                     : csmc_sweep(model, observations, config.particles, state.retained[j], rng));
    next.candidates[m] = rng.categorical(final_weights(*sweep));
    next.sweeps[m] = std::move(sweep);
  });

  // Everything below runs on the coordinator and sees only what the ledger hands over.
  MessageLedger ledger(nodes);
  std::vector<double> log_evidence(nodes);
  for (std::size_t m = 0; m < nodes; ++m) {
    log_evidence[m] = ledger.receive_evidence(m, *next.sweeps[m]);
  }
  auto rng = coordinator_stream(root, next.iteration);
  next.zeta.resize(slots * nodes);
  next.conditional = gibbs_update_indices(log_evidence, state.conditional, rng, next.zeta);
  next.retained_index.resize(slots);
  next.retained.reserve(slots);
  for (std::size_t j = 0; j < slots; ++j) {
    const std::size_t m = next.conditional[j];
    next.retained_index[j] = next.candidates[m];
    next.retained.push_back(ledger.fetch_trajectory(m, *next.sweeps[m], next.candidates[m]));
  }
  next.exchange = ledger.counts();
  return next;
}

double ChainSummary::switch_rate() const {
  return iterations == 0 ? 0.0 : static_cast<double>(switches) / static_cast<double>(iterations);
}

double ChainSummary::acceptance_rate() const {
  return mh_tests == 0 ? 0.0 : static_cast<double>(mh_accepts) / static_cast<double>(mh_tests);
}

IterationRecord make_record(const PoolState& state, bool initialization) {
  IterationRecord record;
  record.iteration = state.iteration;
  record.initialization = initialization;
  record.sweeps = state.sweeps;
  record.conditional = state.conditional;
  record.retained_index = state.retained_index;
  record.retained = state.retained;
  record.zeta = state.zeta;
  return record;
}

ChainSummary run_chain(const PoolConfig& config, const StateSpaceModel& model, const Observations& observations,
                       std::span<ChainSink* const> sinks, std::optional<std::vector<Trajectory>> warm_start) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const RandomStream root(config.seed);
  ChainSummary summary;
  auto emit = [&](const PoolState& state, bool initialization) {
    const auto record = make_record(state, initialization);
    for (auto* sink : sinks) {
      sink->on_iteration(record);
    }
    ++summary.records;
    summary.scalars_exchanged += state.exchange.scalars();
    summary.trajectories_exchanged += state.exchange.trajectories;
  };

  try {
    PoolState state;
    if (warm_start.has_value()) {
      state = init_pool_from(config, std::move(*warm_start));
    } else {
      state = init_pool(config, model, observations, root);
      emit(state, true);
    }
    for (std::size_t r = 0; r < config.iterations; ++r) {
      auto next = ipmcmc_step(state, model, observations, config, root);
      if (next.conditional != state.conditional) {
        ++summary.switches;
      }
      ++summary.iterations;
      state = std::move(next);
      emit(state, false);
    }
  } catch (const std::exception& error) {
    for (auto* sink : sinks) {
      sink->on_abort(error.what());
    }
    throw;
  }
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  for (auto* sink : sinks) {
    sink->on_finish(summary);
  }
  return summary;
}

}  // namespace ipmcmc
