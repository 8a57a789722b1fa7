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

#ifndef IPMCMC_MODELS_DISCRETE_HMM_HPP
#define IPMCMC_MODELS_DISCRETE_HMM_HPP

#include <cstddef>
#include <vector>

#include "ipmcmc/model.hpp"
#include "ipmcmc/random.hpp"

/**
 * \file
 * \brief Small discrete hidden Markov model with exact posteriors.
 *
 * States and observation symbols are stored as doubles holding small integers, so the
 * model plugs into the same particle storage as the continuous models.
 */

namespace ipmcmc::models {

struct DiscreteHmm {
  std::size_t state_count = 0;
  std::size_t symbol_count = 0;
  std::vector<double> initial;     // [s]
  std::vector<double> transition;  // [from][to]
  std::vector<double> emission;    // [state][symbol]

  [[nodiscard]] double transition_prob(std::size_t from, std::size_t to) const {
    return transition[from * state_count + to];
  }
  [[nodiscard]] double emission_prob(std::size_t state, std::size_t symbol) const {
    return emission[state * symbol_count + symbol];
  }

  /// Throws DimensionMismatch on bad shapes and InvalidWeight when a row does not sum to one.
  void validate() const;
};

/// Two states, three symbols; the default verification target.
[[nodiscard]] DiscreteHmm two_state_hmm();

class DiscreteHmmModel final : public StateSpaceModel {
 public:
  explicit DiscreteHmmModel(DiscreteHmm hmm);

  [[nodiscard]] const DiscreteHmm& hmm() const noexcept { return hmm_; }

  [[nodiscard]] std::size_t state_dim() const override { return 1; }
  [[nodiscard]] std::size_t observation_dim() const override { return 1; }
  [[nodiscard]] double log_initial(std::span<const double> x) const override;
  [[nodiscard]] double log_transition(std::size_t t, const PathView& past,
                                      std::span<const double> x) const override;
  [[nodiscard]] double log_observation(std::size_t t, const PathView& path,
                                       std::span<const double> y) const override;
  void sample_initial(RandomStream& rng, std::span<double> out) const override;
  void sample_transition(std::size_t t, const PathView& past, RandomStream& rng,
                         std::span<double> out) const override;

 private:
  DiscreteHmm hmm_;
};

struct HmmSample {
  Trajectory latents;
  Observations observations;
};

[[nodiscard]] HmmSample hmm_simulate(const DiscreteHmm& hmm, std::size_t horizon, RandomStream& rng);

/// Index of a path in [0, S^T), first step most significant.
[[nodiscard]] std::size_t path_index(const Trajectory& path, std::size_t state_count);

/// Inverse of path_index().
[[nodiscard]] Trajectory path_from_index(std::size_t index, std::size_t state_count, std::size_t horizon);

struct HmmPosterior {
  double log_evidence = 0.0;
  std::vector<double> marginals;           // [t][s]
  std::vector<double> path_probabilities;  // [path_index], empty for forward-backward
};

/// Brute-force enumeration over all S^T paths. Throws EnumerationTooLarge when
/// S^T exceeds `max_paths`.
[[nodiscard]] HmmPosterior hmm_exact_posterior(const DiscreteHmm& hmm, const Observations& observations,
                                               std::size_t max_paths = 1'000'000);

/// Scaled forward-backward recursions; same evidence and marginals in O(T S^2).
[[nodiscard]] HmmPosterior hmm_forward_backward(const DiscreteHmm& hmm, const Observations& observations);

}  // namespace ipmcmc::models

#endif  // IPMCMC_MODELS_DISCRETE_HMM_HPP
