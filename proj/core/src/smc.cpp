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

#include "ipmcmc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/log_weights.hpp"

namespace ipmcmc {

namespace {

void check_probabilities(std::span<const double> probs) {
  if (probs.empty()) {
    throw AllZeroWeights();
  }
  double total = 0.0;
  for (const double p : probs) {
    if (!(p >= 0.0) || std::isinf(p)) {
      throw InvalidWeight("resampling probability is negative or not finite");
    }
    total += p;
  }
  if (total == 0.0) {
    throw AllZeroWeights();
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidWeight("resampling probabilities do not sum to one");
  }
}

// Inverse-CDF lookup that never lands on a zero-probability category.
class CumulativeTable {
 public:
  explicit CumulativeTable(std::span<const double> probs) : cumulative_(probs.size()) {
    double running = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      running += probs[i];
      cumulative_[i] = running;
    }
  }

  [[nodiscard]] double total() const { return cumulative_.back(); }

  // First index whose cumulative mass exceeds `target`, for target in [0, total()).
  [[nodiscard]] std::size_t find(double target) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) {
      // Only reachable through rounding; fall back to the last positive category.
      auto last = cumulative_.size() - 1;
      while (last > 0 && cumulative_[last] == cumulative_[last - 1]) {
        --last;
      }
      return last;
    }
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

void multinomial_into(std::span<const double> probs, RandomStream& rng, std::span<std::uint32_t> out) {
  const CumulativeTable table(probs);
  for (auto& index : out) {
    index = static_cast<std::uint32_t>(table.find(rng.uniform() * table.total()));
  }
}

void systematic_into(std::span<const double> probs, RandomStream& rng, std::span<std::uint32_t> out) {
  const CumulativeTable table(probs);
  const double spacing = table.total() / static_cast<double>(out.size());
  const double offset = rng.uniform() * spacing;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = static_cast<std::uint32_t>(table.find(offset + static_cast<double>(k) * spacing));
  }
}

// Shared body of the conditional and unconditional sweeps. `retained` is null for SMC.
SweepResult run_sweep(const StateSpaceModel& model, const Observations& observations,
                      std::size_t particle_count, const Trajectory* retained, RandomStream& rng,
                      Resampling resampling) {
  const std::size_t horizon = observations.horizon();
  const std::size_t dim = model.state_dim();
  const std::size_t n = particle_count;
  if (horizon == 0) {
    throw DimensionMismatch("observations are empty");
  }
  if (observations.dim() != model.observation_dim()) {
    throw DimensionMismatch("observation dimension does not match the model");
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionMismatch("particle count exceeds the ancestor index range");
  }
  // Slots [0, free) evolve; slot n - 1 is pinned in a conditional sweep.
  const std::size_t free = retained != nullptr ? n - 1 : n;
  const bool prior = model.proposal_is_prior();

  std::vector<double> particles(horizon * n * dim);
  std::vector<std::uint32_t> ancestors((horizon - 1) * n);
  std::vector<double> log_weights(horizon * n);
  std::vector<double> probs(n);

  auto state_at = [&](std::size_t t, std::size_t i) {
    return std::span<double>(particles.data() + (t * n + i) * dim, dim);
  };
  auto path_at = [&](std::size_t length, std::size_t slot) {
    return PathView(particles.data(), ancestors.data(), n, dim, length, slot);
  };
  auto weigh = [&](std::size_t t, std::size_t i) {
    const auto x = state_at(t, i);
    double lw = model.log_observation(t, path_at(t + 1, i), observations.at(t));
    if (!prior) {
      if (t == 0) {
        lw += model.log_initial(x) - model.log_proposal(0, PathView(), observations, x);
      } else {
        const PathView past = path_at(t, ancestors[(t - 1) * n + i]);
        lw += model.log_transition(t, past, x) - model.log_proposal(t, past, observations, x);
      }
    }
    log_weights[t * n + i] = lw;
  };
  auto normalize_step = [&](std::size_t t) {
    try {
      normalize_log_weights(std::span<const double>(log_weights.data() + t * n, n), probs);
    } catch (const AllZeroWeights&) {
      throw AllZeroWeights(t);
    }
  };

  for (std::size_t i = 0; i < free; ++i) {
    model.propose(0, PathView(), observations, rng, state_at(0, i));
  }
  if (retained != nullptr) {
    std::copy_n(retained->at(0).begin(), dim, state_at(0, n - 1).begin());
  }
  for (std::size_t i = 0; i < n; ++i) {
    weigh(0, i);
  }

  for (std::size_t t = 1; t < horizon; ++t) {
    normalize_step(t - 1);
    const std::span<std::uint32_t> parents(ancestors.data() + (t - 1) * n, n);
    if (resampling == Resampling::systematic && retained == nullptr) {
      systematic_into(probs, rng, parents.first(free));
    } else {
      multinomial_into(probs, rng, parents.first(free));
    }
    for (std::size_t i = 0; i < free; ++i) {
      model.propose(t, path_at(t, parents[i]), observations, rng, state_at(t, i));
    }
    if (retained != nullptr) {
      parents[n - 1] = static_cast<std::uint32_t>(n - 1);
      std::copy_n(retained->at(t).begin(), dim, state_at(t, n - 1).begin());
    }
    for (std::size_t i = 0; i < n; ++i) {
      weigh(t, i);
    }
  }
  normalize_step(horizon - 1);

  return {horizon, n, dim, std::move(particles), std::move(ancestors), std::move(log_weights)};
}

}  // namespace

std::vector<std::size_t> multinomial_resample(std::span<const double> probs, std::size_t count,
                                              RandomStream& rng) {
  check_probabilities(probs);
  std::vector<std::uint32_t> draws(count);
  multinomial_into(probs, rng, draws);
  return {draws.begin(), draws.end()};
}

std::vector<std::size_t> systematic_resample(std::span<const double> probs, std::size_t count,
                                             RandomStream& rng) {
  check_probabilities(probs);
  std::vector<std::uint32_t> draws(count);
  if (count > 0) {
    systematic_into(probs, rng, draws);
  }
  return {draws.begin(), draws.end()};
}

SweepResult smc_sweep(const StateSpaceModel& model, const Observations& observations,
                      std::size_t particle_count, RandomStream& rng, const SweepOptions& options) {
  if (particle_count < 1) {
    throw DimensionMismatch("smc_sweep needs at least one particle");
  }
  return run_sweep(model, observations, particle_count, nullptr, rng, options.resampling);
}

SweepResult csmc_sweep(const StateSpaceModel& model, const Observations& observations,
                       std::size_t particle_count, const Trajectory& retained, RandomStream& rng) {
  if (particle_count < 2) {
    throw DimensionMismatch("csmc_sweep needs at least two particles");
  }
  if (retained.horizon() != observations.horizon() || retained.dim() != model.state_dim()) {
    throw RetainedLengthMismatch("retained trajectory has shape " + std::to_string(retained.horizon()) +
                                 "x" + std::to_string(retained.dim()) + ", expected " +
                                 std::to_string(observations.horizon()) + "x" +
                                 std::to_string(model.state_dim()));
  }
  return run_sweep(model, observations, particle_count, &retained, rng, Resampling::multinomial);
}

}  // namespace ipmcmc
