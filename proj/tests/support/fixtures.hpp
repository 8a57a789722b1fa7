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

#ifndef IPMCMC_TESTS_SUPPORT_FIXTURES_HPP
#define IPMCMC_TESTS_SUPPORT_FIXTURES_HPP

#include <cstddef>
#include <vector>

#include "ipmcmc/model.hpp"
#include "ipmcmc/models/discrete_hmm.hpp"
#include "ipmcmc/models/lgssm.hpp"
#include "ipmcmc/random.hpp"

namespace ipmcmc::testing {

/// Scalar LGSSM x1 ~ N(0, 1), x_t = 0.9 x_{t-1} + N(0, 0.5), y_t = x_t + N(0, 1).
struct ScalarProblem {
  models::LgssmParams params = models::scalar_lgssm_params(0.0, 1.0, 0.9, 0.5, 1.0, 1.0);
  models::LinearGaussianModel model{params};
  Observations observations;

  explicit ScalarProblem(std::size_t horizon, std::uint64_t seed = 3) {
    RandomStream rng(seed);
    observations = models::lgssm_simulate(params, horizon, rng).observations;
  }
};

/// Two-state HMM with a fixed symbol sequence and its enumerated posterior.
struct HmmProblem {
  models::DiscreteHmm hmm = models::two_state_hmm();
  models::DiscreteHmmModel model{hmm};
  Observations observations;
  models::HmmPosterior exact;

  explicit HmmProblem(std::vector<double> symbols = {0.0, 2.0, 1.0})
      : observations(symbols.size(), 1, symbols),
        exact(models::hmm_exact_posterior(hmm, observations)) {}

  [[nodiscard]] std::size_t index(const Trajectory& path) const { return models::path_index(path, 2); }
  [[nodiscard]] std::vector<std::size_t> empty_counts() const {
    return std::vector<std::size_t>(exact.path_probabilities.size(), 0);
  }
};

}  // namespace ipmcmc::testing

#endif  // IPMCMC_TESTS_SUPPORT_FIXTURES_HPP
