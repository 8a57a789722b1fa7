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

#ifndef IPMCMC_SWEEP_HPP
#define IPMCMC_SWEEP_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ipmcmc/model.hpp"

namespace ipmcmc {

/// Everything one (conditional) SMC sweep generated: particles, ancestors and log-weights.
/**
 * Storage is index-0 based. `ancestor(t, i)` is the slot at step t - 1 that particle i
 * at step t descends from, defined for t >= 1. The log marginal likelihood estimate is
 * computed once at construction with marginal_likelihood_estimate(), so
 * `log_evidence()` and a recomputation agree bit for bit.
 *
 * Immutable after construction.
 */
class SweepResult {
 public:
  /// Validates shapes, ancestor ranges and that every step has a finite log-weight.
  SweepResult(std::size_t horizon, std::size_t particle_count, std::size_t state_dim,
              std::vector<double> particles, std::vector<std::uint32_t> ancestors,
              std::vector<double> log_weights);

  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t particle_count() const noexcept { return particle_count_; }
  [[nodiscard]] std::size_t state_dim() const noexcept { return state_dim_; }

  [[nodiscard]] std::span<const double> state(std::size_t t, std::size_t i) const {
    return {particles_.data() + (t * particle_count_ + i) * state_dim_, state_dim_};
  }
  [[nodiscard]] std::size_t ancestor(std::size_t t, std::size_t i) const {
    return ancestors_[(t - 1) * particle_count_ + i];
  }
  [[nodiscard]] std::span<const double> log_weights(std::size_t t) const {
    return {log_weights_.data() + t * particle_count_, particle_count_};
  }

  /// log Z-hat, the log of the product over steps of the mean unnormalized weight.
  [[nodiscard]] double log_evidence() const noexcept { return log_evidence_; }

  /// History x_{1:t+1} of particle i at step t.
  [[nodiscard]] PathView path(std::size_t t, std::size_t i) const {
    return {particles_.data(), ancestors_.data(), particle_count_, state_dim_, t + 1, i};
  }

  [[nodiscard]] std::span<const double> particle_table() const noexcept { return particles_; }
  [[nodiscard]] std::span<const std::uint32_t> ancestor_table() const noexcept { return ancestors_; }
  [[nodiscard]] std::span<const double> log_weight_table() const noexcept { return log_weights_; }

  friend bool operator==(const SweepResult&, const SweepResult&) = default;

 private:
  std::size_t horizon_;
  std::size_t particle_count_;
  std::size_t state_dim_;
  std::vector<double> particles_;        // [t][i][d]
  std::vector<std::uint32_t> ancestors_;  // [t - 1][i]
  std::vector<double> log_weights_;      // [t][i]
  double log_evidence_;
};

/// Sum over steps of log_mean_exp(log_weights(t)).
[[nodiscard]] double marginal_likelihood_estimate(const SweepResult& sweep);

/// Slots beta_1..beta_T traced back from a final particle; beta_T is the final index.
struct LineageTrace {
  std::vector<std::size_t> slots;

  friend bool operator==(const LineageTrace&, const LineageTrace&) = default;
};

struct ExtractedPath {
  Trajectory trajectory;
  LineageTrace lineage;
};

/// Follows the ancestral lineage of final particle `final_index` back to the first step.
/// Throws IndexOutOfRange when final_index >= particle_count().
[[nodiscard]] ExtractedPath extract_trajectory(const SweepResult& sweep, std::size_t final_index);

/// All N final trajectories at once in O(T N dim); element i equals
/// extract_trajectory(sweep, i).trajectory.
[[nodiscard]] std::vector<Trajectory> extract_all_trajectories(const SweepResult& sweep);

/// For every step t and final particle i, the slot at step t on i's lineage; laid out [t][i].
[[nodiscard]] std::vector<std::uint32_t> final_lineages(const SweepResult& sweep);

/// Normalized final-step weights.
[[nodiscard]] std::vector<double> final_weights(const SweepResult& sweep);

}  // namespace ipmcmc

#endif  // IPMCMC_SWEEP_HPP
