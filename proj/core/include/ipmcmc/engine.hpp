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

#ifndef IPMCMC_ENGINE_HPP
#define IPMCMC_ENGINE_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ipmcmc/model.hpp"
#include "ipmcmc/random.hpp"
#include "ipmcmc/sweep.hpp"

/**
 * \file
 * \brief The interacting node pool: M sweeps per iteration, P of them conditional.
 *
 * Node indices, slot indices and particle indices are 0-based. Randomness is split
 * by label from one root stream:
 *
 *  - node m at iteration r draws from node_stream(root, m, r); iteration 0 is the
 *    initialization sweep;
 *  - the Gibbs loop over conditional slots at iteration r draws from
 *    coordinator_stream(root, r).
 *
 * Every node also draws its candidate retained index from its own stream right
 * after its sweep, whether or not the candidate is used. Results are therefore a
 * function of the root seed only, whatever the number of workers.
 */

namespace ipmcmc {

struct PoolConfig {
  std::size_t nodes = 32;        // M
  std::size_t conditional = 16;  // P
  std::size_t particles = 100;   // N
  std::size_t iterations = 1000; // R
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

[[nodiscard]] RandomStream node_stream(const RandomStream& root, std::size_t node, std::size_t iteration);
[[nodiscard]] RandomStream coordinator_stream(const RandomStream& root, std::size_t iteration);

/// Index-update probabilities of one Gibbs slot over all M nodes.
struct GibbsWeights {
  std::vector<double> zeta;
};

/// What crossed the node/coordinator boundary during one iteration.
struct ExchangeCounts {
  std::vector<std::size_t> scalars_per_node;  // log Z-hat messages received from each node
  std::size_t trajectories = 0;               // retained paths fetched from nodes

  [[nodiscard]] std::size_t scalars() const;

  friend bool operator==(const ExchangeCounts&, const ExchangeCounts&) = default;
};

/// Counts every message the coordinator receives from the nodes.
class MessageLedger {
 public:
  explicit MessageLedger(std::size_t nodes) { counts_.scalars_per_node.assign(nodes, 0); }

  double receive_evidence(std::size_t node, const SweepResult& sweep);
  Trajectory fetch_trajectory(std::size_t node, const SweepResult& sweep, std::size_t final_index);

  [[nodiscard]] const ExchangeCounts& counts() const noexcept { return counts_; }

 private:
  ExchangeCounts counts_;
};

struct PoolState {
  std::size_t iteration = 0;
  std::vector<std::shared_ptr<const SweepResult>> sweeps;  // one per node
  std::vector<std::size_t> candidates;                     // final index drawn upfront by each node
  std::vector<std::size_t> conditional;                    // c_j, one per slot
  std::vector<std::size_t> retained_index;                 // b_j, index into sweeps[c_j]
  std::vector<Trajectory> retained;                        // x'_j
  std::vector<double> zeta;                                // [slot][node]
  ExchangeCounts exchange;

  [[nodiscard]] std::size_t nodes() const noexcept { return sweeps.size(); }
  [[nodiscard]] std::size_t slots() const noexcept { return conditional.size(); }

  /// Compares sweep contents, not pointers.
  friend bool operator==(const PoolState& a, const PoolState& b);
};

/// Iteration 0: every node runs SMC, slot j is assigned node j and takes that node's candidate.
[[nodiscard]] PoolState init_pool(const PoolConfig& config, const StateSpaceModel& model,
                                  const Observations& observations, const RandomStream& root);

/// Iteration 0 from user-supplied retained trajectories, one per slot. No sweeps are run.
[[nodiscard]] PoolState init_pool_from(const PoolConfig& config, std::vector<Trajectory> retained);

/// Sequential Gibbs loop over the P slots.
/**
 * Slot j is redrawn from the weights proportional to Z-hat over the nodes not held by
 * any other slot, using the indices as already updated for earlier slots. Writes the
 * P x M matrix of update probabilities to `zeta_out` when it is non-empty.
 */
[[nodiscard]] std::vector<std::size_t> gibbs_update_indices(std::span<const double> log_evidence,
                                                            std::span<const std::size_t> conditional,
                                                            RandomStream& rng,
                                                            std::span<double> zeta_out = {});

/// Probabilities used by one slot's update; entries of nodes held by other slots are 0.
[[nodiscard]] GibbsWeights gibbs_weights(std::span<const double> log_evidence,
                                         std::span<const std::size_t> conditional, std::size_t slot);

struct Selection {
  std::size_t index = 0;
  Trajectory trajectory;
  LineageTrace lineage;
};

/// Draws b from the normalized final weights and extracts its path.
[[nodiscard]] Selection select_retained(const SweepResult& sweep, RandomStream& rng);

/// One full iteration: node sweeps (in parallel), Gibbs loop, new retained paths.
[[nodiscard]] PoolState ipmcmc_step(const PoolState& state, const StateSpaceModel& model,
                                    const Observations& observations, const PoolConfig& config,
                                    const RandomStream& root);

/// One chain state as seen by record sinks. Spans point into sampler-owned storage and
/// are valid only during the callback.
struct IterationRecord {
  std::size_t iteration = 0;
  bool initialization = false;
  /// Sub-step within the iteration; alternating samplers emit two records per iteration.
  std::size_t stage = 0;
  std::span<const std::shared_ptr<const SweepResult>> sweeps;  // per node; may be empty
  std::span<const std::size_t> conditional;                    // per slot
  std::span<const std::size_t> retained_index;                 // per slot
  std::span<const Trajectory> retained;                        // per slot
  std::span<const double> zeta;                                // [slot][node]
  std::span<const std::int8_t> accepted;                       // per chain; -1 when no MH test ran

  [[nodiscard]] std::size_t nodes() const noexcept { return sweeps.size(); }
  [[nodiscard]] std::size_t slots() const noexcept { return conditional.size(); }
};

struct ChainSummary {
  std::size_t iterations = 0;
  std::size_t records = 0;
  std::size_t switches = 0;
  std::size_t mh_tests = 0;
  std::size_t mh_accepts = 0;
  std::size_t scalars_exchanged = 0;
  std::size_t trajectories_exchanged = 0;
  double seconds = 0.0;

  [[nodiscard]] double switch_rate() const;
  [[nodiscard]] double acceptance_rate() const;
};

/// Receives the record stream of a chain.
class ChainSink {
 public:
  virtual ~ChainSink() = default;

  virtual void on_iteration(const IterationRecord& record) = 0;
  virtual void on_finish(const ChainSummary& /*summary*/) {}
  /// Called instead of on_finish when the chain throws; the sink should flush.
  virtual void on_abort(std::string_view /*reason*/) {}
};

/// Initialization followed by R iterations, streaming one record per state to `sinks`.
/**
 * The initialization record is flagged. A switch is an iteration in which some slot's
 * node index changed. On an exception every sink receives on_abort() before the
 * exception propagates.
 */
ChainSummary run_chain(const PoolConfig& config, const StateSpaceModel& model,
                       const Observations& observations, std::span<ChainSink* const> sinks,
                       std::optional<std::vector<Trajectory>> warm_start = std::nullopt);

[[nodiscard]] IterationRecord make_record(const PoolState& state, bool initialization);

}  // namespace ipmcmc

#endif  // IPMCMC_ENGINE_HPP
