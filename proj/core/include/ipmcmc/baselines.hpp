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

#ifndef IPMCMC_BASELINES_HPP
#define IPMCMC_BASELINES_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "ipmcmc/engine.hpp"
#include "ipmcmc/model.hpp"
#include "ipmcmc/random.hpp"
#include "ipmcmc/sweep.hpp"

/**
 * \file
 * \brief Particle Gibbs, particle independent Metropolis-Hastings, their alternation,
 * and multi-start runners built on the same sweeps.
 *
 * Multi-start chain m at iteration r draws from node_stream(root, m, r), the stream
 * that node m of the interacting pool would use. A multi-start PG run and a pool run
 * with P = M are therefore identical draw for draw.
 */

namespace ipmcmc {

enum class SamplerKind { ipmcmc, mpg, mpimh, mapg, smc, pg, pimh };

[[nodiscard]] std::string_view to_string(SamplerKind kind);
/// Throws InvalidConfig("sampler.kind", ...) on unknown names.
[[nodiscard]] SamplerKind parse_sampler_kind(std::string_view name);

struct PgResult {
  Selection selection;
  std::shared_ptr<const SweepResult> sweep;
};

/// Conditional sweep around `retained`, then a new retained path from the final weights.
[[nodiscard]] PgResult pg_step(const Trajectory& retained, const StateSpaceModel& model,
                               const Observations& observations, std::size_t particle_count,
                               RandomStream& rng);

/// Chain state of PIMH: the accepted particle system and the path selected from it.
struct PimhState {
  Trajectory trajectory;
  double log_evidence = 0.0;
  std::size_t index = 0;
  std::shared_ptr<const SweepResult> sweep;
};

/// Accepts with probability min(1, exp(log_ratio)). Always consumes exactly one uniform.
bool metropolis_accept(double log_ratio, RandomStream& rng);

struct PimhResult {
  PimhState state;
  bool accepted = false;
};

/// Proposes a fresh SMC sweep and path; accepts by the ratio of evidence estimates.
[[nodiscard]] PimhResult pimh_step(const PimhState& current, const StateSpaceModel& model,
                                   const Observations& observations, std::size_t particle_count,
                                   RandomStream& rng);

struct ApgOptions {
  bool run_pg = true;
  bool run_pimh = true;
  /// Runs the PIMH proposal but always rejects it.
  bool force_reject = false;
};

struct ApgResult {
  PimhState after_pg;
  PimhState after_pimh;
  std::optional<bool> accepted;  // empty when the PIMH half was skipped
};

/// One PG step (stream rng.derive("pg")) followed by one PIMH step (rng.derive("pimh")).
/**
 * After the PG half the state is the conditional sweep with its own evidence
 * estimate, which the PIMH half then uses as the current value.
 */
[[nodiscard]] ApgResult apg_step(const PimhState& state, const StateSpaceModel& model,
                                 const Observations& observations, std::size_t particle_count,
                                 RandomStream& rng, const ApgOptions& options = {});

/// M independent chains of the given kind run in lockstep.
/**
 * `config.conditional` is ignored. The single-chain kinds `pg` and `pimh` require
 * `config.nodes == 1`. Records use the same layout as the pool: slot j is chain j and
 * the slot weights form the identity matrix, which gives every chain the weight 1/M.
 * The alternating sampler emits two records per iteration, stage 0 after PG and
 * stage 1 after PIMH. `smc` runs independent sweeps with no chain state.
 */
ChainSummary run_multi_start(SamplerKind kind, const PoolConfig& config, const StateSpaceModel& model,
                             const Observations& observations, std::span<ChainSink* const> sinks,
                             const ApgOptions& apg = {});

/// Dispatches to run_chain() or run_multi_start().
ChainSummary run_sampler(SamplerKind kind, const PoolConfig& config, const StateSpaceModel& model,
                         const Observations& observations, std::span<ChainSink* const> sinks);

}  // namespace ipmcmc

#endif  // IPMCMC_BASELINES_HPP
