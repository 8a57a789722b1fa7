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

#include "ipmcmc/models/nlssm.hpp"

#include <numbers>

#include "ipmcmc/errors.hpp"

namespace ipmcmc::models {

namespace {

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Internal steps are 0-based; the model's clock starts at 1.
double clock(std::size_t t) { return static_cast<double>(t + 1); }

}  // namespace

void NlssmParams::validate() const {
  if (!(initial_sd > 0.0) || !(transition_sd > 0.0) || !(observation_sd > 0.0)) {
    throw InvalidConfig("nlssm", "standard deviations must be positive");
  }
}

double nlssm_transition_mean(double time, double previous) {
  return previous / 2.0 + 25.0 * previous / (1.0 + previous * previous) + 8.0 * std::cos(1.2 * time);
}

NonlinearModel::NonlinearModel(NlssmParams params) : params_(params) { params_.validate(); }

double NonlinearModel::log_initial(std::span<const double> x) const {
  return normal_log_pdf(x[0], params_.initial_mean, params_.initial_sd);
}

double NonlinearModel::log_transition(std::size_t t, const PathView& past, std::span<const double> x) const {
  return normal_log_pdf(x[0], nlssm_transition_mean(clock(t), past.back()[0]), params_.transition_sd);
}

double NonlinearModel::log_observation(std::size_t /*t*/, const PathView& path, std::span<const double> y) const {
  return normal_log_pdf(y[0], nlssm_observation_mean(path.back()[0]), params_.observation_sd);
}

void NonlinearModel::sample_initial(RandomStream& rng, std::span<double> out) const {
  out[0] = params_.initial_mean + params_.initial_sd * rng.normal();
}

void NonlinearModel::sample_transition(std::size_t t, const PathView& past, RandomStream& rng,
                                       std::span<double> out) const {
  out[0] = nlssm_transition_mean(clock(t), past.back()[0]) + params_.transition_sd * rng.normal();
}

NlssmSample nlssm_simulate(const NlssmParams& params, std::size_t horizon, RandomStream& rng) {
  params.validate();
  std::vector<double> xs(horizon);
  std::vector<double> ys(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    if (t == 0) {
      xs[t] = params.initial_mean + params.initial_sd * rng.normal();
    } else {
      xs[t] = nlssm_transition_mean(clock(t), xs[t - 1]) + params.transition_sd * rng.normal();
    }
    ys[t] = nlssm_observation_mean(xs[t]) + params.observation_sd * rng.normal();
  }
  return {Trajectory(horizon, 1, std::move(xs)), Observations(horizon, 1, std::move(ys))};
}

}  // namespace ipmcmc::models
