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

#ifndef IPMCMC_MODELS_NLSSM_HPP
#define IPMCMC_MODELS_NLSSM_HPP

#include <cmath>

#include "ipmcmc/model.hpp"
#include "ipmcmc/random.hpp"

namespace ipmcmc::models {

/// Scalar nonlinear benchmark:
///   x_1 ~ N(mu, v^2)
///   x_t = x_{t-1}/2 + 25 x_{t-1} / (1 + x_{t-1}^2) + 8 cos(1.2 t) + N(0, omega^2)
///   y_t = x_t^2 / 20 + N(0, sigma^2)
/// with t counted from 1.
struct NlssmParams {
  double initial_mean = 0.0;                  // mu
  double initial_sd = std::sqrt(5.0);         // v
  double transition_sd = std::sqrt(10.0);     // omega
  double observation_sd = std::sqrt(10.0);    // sigma

  void validate() const;
};

/// Transition mean for the state at 1-based time `time` given the previous state.
[[nodiscard]] double nlssm_transition_mean(double time, double previous);

/// Observation mean x^2 / 20.
[[nodiscard]] inline double nlssm_observation_mean(double x) { return x * x / 20.0; }

class NonlinearModel final : public StateSpaceModel {
 public:
  explicit NonlinearModel(NlssmParams params = {});

  [[nodiscard]] const NlssmParams& params() const noexcept { return params_; }

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
  NlssmParams params_;
};

struct NlssmSample {
  Trajectory latents;
  Observations observations;
};

[[nodiscard]] NlssmSample nlssm_simulate(const NlssmParams& params, std::size_t horizon, RandomStream& rng);

}  // namespace ipmcmc::models

#endif  // IPMCMC_MODELS_NLSSM_HPP
