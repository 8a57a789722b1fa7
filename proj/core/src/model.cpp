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

#include "ipmcmc/model.hpp"

#include "ipmcmc/errors.hpp"

namespace ipmcmc {

Observations::Observations(std::size_t horizon, std::size_t dim, std::vector<double> values)
    : horizon_(horizon), dim_(dim), values_(std::move(values)) {
  if (values_.size() != horizon_ * dim_) {
    throw DimensionMismatch("observation table size is not horizon x dim");
  }
}

Trajectory::Trajectory(std::size_t horizon, std::size_t dim)
    : horizon_(horizon), dim_(dim), values_(horizon * dim, 0.0) {}

Trajectory::Trajectory(std::size_t horizon, std::size_t dim, std::vector<double> values)
    : horizon_(horizon), dim_(dim), values_(std::move(values)) {
  if (values_.size() != horizon_ * dim_) {
    throw DimensionMismatch("trajectory size is not horizon x dim");
  }
}

std::span<const double> PathView::at(std::size_t s) const noexcept {
  std::size_t slot = slot_;
  if (ancestors_ != nullptr) {
    for (std::size_t t = length_ - 1; t > s; --t) {
      slot = ancestors_[(t - 1) * particle_count_ + slot];
    }
  }
  return {particles_ + (s * particle_count_ + slot) * dim_, dim_};
}

void StateSpaceModel::propose(std::size_t t, const PathView& past, const Observations& /*observations*/,
                              RandomStream& rng, std::span<double> out) const {
  if (t == 0) {
    sample_initial(rng, out);
  } else {
    sample_transition(t, past, rng, out);
  }
}

double StateSpaceModel::log_proposal(std::size_t t, const PathView& past,
                                     const Observations& /*observations*/,
                                     std::span<const double> x) const {
  return t == 0 ? log_initial(x) : log_transition(t, past, x);
}

double log_joint_density(const StateSpaceModel& model, const Observations& observations,
                         const Trajectory& path) {
  if (path.horizon() != observations.horizon() || path.dim() != model.state_dim()) {
    throw DimensionMismatch("log_joint_density: path shape does not match model and data");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < path.horizon(); ++t) {
    if (t == 0) {
      total += model.log_initial(path.at(0));
    } else {
      total += model.log_transition(t, PathView(path, t), path.at(t));
    }
    total += model.log_observation(t, PathView(path, t + 1), observations.at(t));
  }
  return total;
}

}  // namespace ipmcmc
