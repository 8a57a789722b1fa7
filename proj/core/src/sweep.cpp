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

#include "ipmcmc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/log_weights.hpp"

namespace ipmcmc {

namespace {

double sum_log_mean_exp(std::size_t horizon, std::size_t particle_count,
                        std::span<const double> log_weights) {
  double total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    total += log_mean_exp(log_weights.subspan(t * particle_count, particle_count));
  }
  return total;
}

}  // namespace

SweepResult::SweepResult(std::size_t horizon, std::size_t particle_count, std::size_t state_dim,
                         std::vector<double> particles, std::vector<std::uint32_t> ancestors,
                         std::vector<double> log_weights)
    : horizon_(horizon),
      particle_count_(particle_count),
      state_dim_(state_dim),
      particles_(std::move(particles)),
      ancestors_(std::move(ancestors)),
      log_weights_(std::move(log_weights)),
      log_evidence_(0.0) {
  if (horizon_ == 0 || particle_count_ == 0) {
    throw DimensionMismatch("sweep needs at least one step and one particle");
  }
  if (particles_.size() != horizon_ * particle_count_ * state_dim_ ||
      ancestors_.size() != (horizon_ - 1) * particle_count_ ||
      log_weights_.size() != horizon_ * particle_count_) {
    throw DimensionMismatch("sweep tables do not match horizon x particles x dim");
  }
  if (std::any_of(ancestors_.begin(), ancestors_.end(),
                  [n = particle_count_](std::uint32_t a) { return a >= n; })) {
    throw IndexOutOfRange("ancestor index outside [0, N)");
  }
  for (std::size_t t = 0; t < horizon_; ++t) {
    const auto lw = this->log_weights(t);
    if (std::none_of(lw.begin(), lw.end(), [](double w) { return std::isfinite(w); })) {
      throw AllZeroWeights(t);
    }
  }
  log_evidence_ = sum_log_mean_exp(horizon_, particle_count_, log_weights_);
}

double marginal_likelihood_estimate(const SweepResult& sweep) {
  return sum_log_mean_exp(sweep.horizon(), sweep.particle_count(), sweep.log_weight_table());
}

ExtractedPath extract_trajectory(const SweepResult& sweep, std::size_t final_index) {
  if (final_index >= sweep.particle_count()) {
    throw IndexOutOfRange("final index " + std::to_string(final_index) + " outside [0, " +
                          std::to_string(sweep.particle_count()) + ")");
  }
  const std::size_t horizon = sweep.horizon();
  ExtractedPath out{Trajectory(horizon, sweep.state_dim()), LineageTrace{std::vector<std::size_t>(horizon)}};
  std::size_t slot = final_index;
  for (std::size_t t = horizon; t-- > 0;) {
    out.lineage.slots[t] = slot;
    const auto state = sweep.state(t, slot);
    std::copy(state.begin(), state.end(), out.trajectory.at(t).begin());
    if (t > 0) {
      slot = sweep.ancestor(t, slot);
    }
  }
  return out;
}

std::vector<std::uint32_t> final_lineages(const SweepResult& sweep) {
  const std::size_t n = sweep.particle_count();
  const std::size_t horizon = sweep.horizon();
  std::vector<std::uint32_t> slots(horizon * n);
  std::iota(slots.end() - static_cast<std::ptrdiff_t>(n), slots.end(), 0U);
  for (std::size_t t = horizon - 1; t > 0; --t) {
    for (std::size_t i = 0; i < n; ++i) {
      slots[(t - 1) * n + i] = static_cast<std::uint32_t>(sweep.ancestor(t, slots[t * n + i]));
    }
  }
  return slots;
}

std::vector<Trajectory> extract_all_trajectories(const SweepResult& sweep) {
  const std::size_t n = sweep.particle_count();
  const auto lineages = final_lineages(sweep);
  std::vector<Trajectory> out(n, Trajectory(sweep.horizon(), sweep.state_dim()));
  for (std::size_t t = 0; t < sweep.horizon(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto state = sweep.state(t, lineages[t * n + i]);
      std::copy(state.begin(), state.end(), out[i].at(t).begin());
    }
  }
  return out;
}

std::vector<double> final_weights(const SweepResult& sweep) {
  return normalize_log_weights(sweep.log_weights(sweep.horizon() - 1));
}

}  // namespace ipmcmc
