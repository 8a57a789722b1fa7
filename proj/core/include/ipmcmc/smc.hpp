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

#ifndef IPMCMC_SMC_HPP
#define IPMCMC_SMC_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "ipmcmc/model.hpp"
#include "ipmcmc/random.hpp"
#include "ipmcmc/sweep.hpp"

/**
 * \file
 * \brief Unconditional and conditional SMC sweeps.
 *
 * Both sweeps resample at every step. A sweep is single threaded and touches no
 * shared mutable state, so any number may run concurrently as long as each one
 * owns its RandomStream.
 */

namespace ipmcmc {

enum class Resampling {
  multinomial,
  /// Lower variance, but ancestors are no longer conditionally i.i.d.; never used by CSMC.
  systematic,
};

struct SweepOptions {
  Resampling resampling = Resampling::multinomial;
};

/// `count` i.i.d. categorical draws from `probs`, which must sum to one within 1e-9.
[[nodiscard]] std::vector<std::size_t> multinomial_resample(std::span<const double> probs,
                                                            std::size_t count, RandomStream& rng);

/// Systematic resampling: one uniform offset, `count` evenly spaced points.
[[nodiscard]] std::vector<std::size_t> systematic_resample(std::span<const double> probs,
                                                           std::size_t count, RandomStream& rng);

/// Unconditional SMC sweep with N particles.
/**
 * Step 0 proposes from q_1 and weights by g_1 mu / q_1. Every later step draws all N
 * ancestors from the normalized previous weights, proposes from q_t and weights by
 * g_t f_t / q_t. Throws AllZeroWeights (carrying the step) if every weight of a step
 * vanishes; exceptions thrown by the model propagate unchanged.
 */
[[nodiscard]] SweepResult smc_sweep(const StateSpaceModel& model, const Observations& observations,
                                    std::size_t particle_count, RandomStream& rng,
                                    const SweepOptions& options = {});

/// Conditional SMC sweep; the last slot (N - 1) is pinned to `retained`.
/**
 * Slots 0..N-2 resample from the weights of all N particles and propose freely. The
 * pinned slot copies `retained` at every step and is its own ancestor. All N
 * particles are weighted, so `log_evidence()` covers the retained path too, and
 * extract_trajectory(result, N - 1) reproduces `retained` exactly.
 *
 * Requires N >= 2; throws RetainedLengthMismatch if `retained` does not match the
 * observation horizon or the model's state dimension.
 */
[[nodiscard]] SweepResult csmc_sweep(const StateSpaceModel& model, const Observations& observations,
                                     std::size_t particle_count, const Trajectory& retained,
                                     RandomStream& rng);

}  // namespace ipmcmc

#endif  // IPMCMC_SMC_HPP
