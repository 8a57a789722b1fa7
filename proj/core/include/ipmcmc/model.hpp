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

#ifndef IPMCMC_MODEL_HPP
#define IPMCMC_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ipmcmc/random.hpp"

/**
 * \file
 * \brief Targets for the samplers: latent paths, observations and the model interface.
 *
 * Time steps are 0-based throughout the code: step t = 0 holds the first latent state.
 */

namespace ipmcmc {

/// A row-major T x dim table of observations y_{1:T}.
class Observations {
 public:
  Observations() = default;
  Observations(std::size_t horizon, std::size_t dim, std::vector<double> values);

  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::span<const double> at(std::size_t t) const {
    return {values_.data() + t * dim_, dim_};
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Observations&, const Observations&) = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

/// One full latent path x_{1:T}; row-major T x dim.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t horizon, std::size_t dim);
  Trajectory(std::size_t horizon, std::size_t dim, std::vector<double> values);

  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::span<const double> at(std::size_t t) const {
    return {values_.data() + t * dim_, dim_};
  }
  [[nodiscard]] std::span<double> at(std::size_t t) { return {values_.data() + t * dim_, dim_}; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Exact element-wise comparison of shape and values.
  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

/// Read-only view of a particle's history x_{1:length}.
/**
 * The view does not copy the path. Inside a sweep it walks the ancestor table on
 * demand: `back()` is O(1) and `at(s)` is O(length - s). A view over a Trajectory
 * reads the trajectory directly. Views are only valid while the storage they point
 * into is alive and unchanged.
 */
class PathView {
 public:
  /// Empty history (used for the initial step).
  PathView() = default;

  /// History of slot `slot` at step `length - 1` in a particle table laid out as
  /// [t][slot][dim]. `ancestors` is laid out as [t - 1][slot] and gives the parent
  /// slot at step t - 1 of each slot at step t.
  PathView(const double* particles, const std::uint32_t* ancestors, std::size_t particle_count,
           std::size_t dim, std::size_t length, std::size_t slot) noexcept
      : particles_(particles),
        ancestors_(ancestors),
        particle_count_(particle_count),
        dim_(dim),
        length_(length),
        slot_(slot) {}

  /// The first `length` states of a trajectory.
  PathView(const Trajectory& trajectory, std::size_t length) noexcept
      : particles_(trajectory.values().data()),
        particle_count_(1),
        dim_(trajectory.dim()),
        length_(length) {}

  [[nodiscard]] std::size_t length() const noexcept { return length_; }
  [[nodiscard]] bool empty() const noexcept { return length_ == 0; }

  /// Most recent state; requires a non-empty view.
  [[nodiscard]] std::span<const double> back() const noexcept {
    return {particles_ + ((length_ - 1) * particle_count_ + slot_) * dim_, dim_};
  }

  /// State at step s < length().
  [[nodiscard]] std::span<const double> at(std::size_t s) const noexcept;

 private:
  const double* particles_ = nullptr;
  const std::uint32_t* ancestors_ = nullptr;
  std::size_t particle_count_ = 0;
  std::size_t dim_ = 0;
  std::size_t length_ = 0;
  std::size_t slot_ = 0;
};

/// A (possibly non-Markovian) latent variable model and its proposals.
/**
 * Implementations describe the initial density mu, transitions f_t, observation
 * densities g_t and proposals q_t. Densities may inspect the whole history through
 * the PathView they receive. By default the proposal is the prior transition, in
 * which case the transition and proposal terms cancel in the importance weight and
 * are never evaluated by the sweeps.
 *
 * All member functions must be safe to call concurrently from several threads.
 */
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  [[nodiscard]] virtual std::size_t state_dim() const = 0;
  [[nodiscard]] virtual std::size_t observation_dim() const = 0;

  /// log mu(x_1).
  [[nodiscard]] virtual double log_initial(std::span<const double> x) const = 0;

  /// log f_t(x_t | x_{1:t-1}) for t >= 1; `past` has length t.
  [[nodiscard]] virtual double log_transition(std::size_t t, const PathView& past,
                                              std::span<const double> x) const = 0;

  /// log g_t(y_t | x_{1:t}); `path` has length t + 1 and `path.back()` is x_t.
  [[nodiscard]] virtual double log_observation(std::size_t t, const PathView& path,
                                               std::span<const double> y) const = 0;

  virtual void sample_initial(RandomStream& rng, std::span<double> out) const = 0;
  virtual void sample_transition(std::size_t t, const PathView& past, RandomStream& rng,
                                 std::span<double> out) const = 0;

  /// True when q_t is the prior (mu at t = 0, f_t afterwards).
  [[nodiscard]] virtual bool proposal_is_prior() const { return true; }

  /// Draws x_t ~ q_t(. | x_{1:t-1}); may depend on the observations.
  virtual void propose(std::size_t t, const PathView& past, const Observations& observations,
                       RandomStream& rng, std::span<double> out) const;

  /// log q_t(x_t | x_{1:t-1}); finite wherever propose() can emit x_t.
  [[nodiscard]] virtual double log_proposal(std::size_t t, const PathView& past,
                                            const Observations& observations,
                                            std::span<const double> x) const;
};

/// log p(x_{1:T}, y_{1:T}) of a full path.
[[nodiscard]] double log_joint_density(const StateSpaceModel& model, const Observations& observations,
                                       const Trajectory& path);

}  // namespace ipmcmc

#endif  // IPMCMC_MODEL_HPP
