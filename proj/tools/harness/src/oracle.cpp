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

#include "ipmcmc/harness/oracle.hpp"

#include <cmath>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/smc.hpp"

namespace ipmcmc::harness {

namespace {

// Raw moments E[x^k], k = 1..4, of N(mean, var).
double gaussian_raw_moment(double mean, double var, int k) {
  switch (k) {
    case 1:
      return mean;
    case 2:
      return mean * mean + var;
    case 3:
      return mean * mean * mean + 3.0 * mean * var;
    default:
      return std::pow(mean, 4) + 6.0 * mean * mean * var + 3.0 * var * var;
  }
}

}  // namespace

GroundTruth ground_truth(const ModelBundle& bundle, const Dataset& dataset, int max_power) {
  if (max_power < 1 || max_power > 4) {
    throw InvalidConfig("output.max_power", "must lie in [1, 4]");
  }
  const std::size_t horizon = dataset.observations.horizon();
  GroundTruth truth;
  truth.horizon = horizon;
  truth.max_power = max_power;

  if (bundle.lgssm) {
    const std::size_t dim = bundle.lgssm->state_dim();
    truth.dim = dim;
    const auto filtered = models::kalman_filter(*bundle.lgssm, dataset.observations);
    const auto smoothed = models::rts_smoother(*bundle.lgssm, filtered);
    truth.log_evidence = filtered.log_evidence;
    const std::size_t block = horizon * dim;
    truth.moments.resize(block * static_cast<std::size_t>(max_power));
    truth.variances.resize(block);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        const auto i = static_cast<Eigen::Index>(d);
        const double mean = smoothed.means[t](i);
        const double var = smoothed.covs[t](i, i);
        truth.variances[t * dim + d] = var;
        for (int k = 1; k <= max_power; ++k) {
          truth.moments[static_cast<std::size_t>(k - 1) * block + t * dim + d] = gaussian_raw_moment(mean, var, k);
        }
      }
    }
    return truth;
  }

  if (bundle.hmm) {
    const auto posterior = models::hmm_forward_backward(*bundle.hmm, dataset.observations);
    const std::size_t states = bundle.hmm->state_count;
    truth.dim = 1;
    truth.log_evidence = posterior.log_evidence;
    truth.moments.assign(horizon * static_cast<std::size_t>(max_power), 0.0);
    truth.variances.assign(horizon, 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      double mean = 0.0;
      double second = 0.0;
      for (std::size_t s = 0; s < states; ++s) {
        const double p = posterior.marginals[t * states + s];
        const double x = static_cast<double>(s);
        mean += p * x;
        second += p * x * x;
        double power = x;
        for (int k = 1; k <= max_power; ++k) {
          truth.moments[static_cast<std::size_t>(k - 1) * horizon + t] += p * power;
          power *= x;
        }
      }
      truth.variances[t] = second - mean * mean;
    }
    return truth;
  }

  throw NoOracleForModel(std::string("no exact posterior for model '") + std::string(to_string(bundle.kind)) +
                         "'; use the SMC reference histograms instead");
}

std::vector<ReferenceHistogram> smc_reference_histograms(const ModelBundle& bundle, const Dataset& dataset,
                                                         const OracleConfig& config, std::uint64_t seed) {
  const std::size_t horizon = dataset.observations.horizon();
  std::vector<ReferenceHistogram> out;
  for (const auto step : config.steps) {
    if (step >= horizon) {
      throw InvalidConfig("oracle.steps", "step outside [0, horizon)");
    }
    out.push_back({step, Histogram{config.lo, config.hi, std::vector<double>(config.bins, 0.0)}});
  }
  const RandomStream root(seed);
  for (std::size_t k = 0; k < config.sweeps; ++k) {
    auto rng = root.derive("reference", k);
    const auto sweep = smc_sweep(*bundle.model, dataset.observations, config.particles, rng);
    const auto mass = final_slot_mass(sweep);
    const std::size_t n = sweep.particle_count();
    for (auto& reference : out) {
      std::vector<double> values;
      std::vector<double> weights;
      for (std::size_t s = 0; s < n; ++s) {
        const double w = mass[reference.step * n + s];
        if (w > 0.0) {
          values.push_back(sweep.state(reference.step, s)[0]);
          weights.push_back(w);
        }
      }
      const auto part = weighted_histogram(values, weights, config.lo, config.hi, config.bins);
      for (std::size_t b = 0; b < config.bins; ++b) {
        reference.histogram.mass[b] += part.mass[b];
      }
    }
  }
  return out;
}

}  // namespace ipmcmc::harness
