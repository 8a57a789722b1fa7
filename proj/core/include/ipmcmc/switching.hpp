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

#ifndef IPMCMC_SWITCHING_HPP
#define IPMCMC_SWITCHING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "ipmcmc/engine.hpp"
#include "ipmcmc/random.hpp"

/**
 * \file
 * \brief Probability that at least one conditional slot changes node in one Gibbs loop.
 */

namespace ipmcmc {

/// 1 - (M - P + 1)^(-P): the switching probability when every Z-hat is equal.
[[nodiscard]] double switch_probability_equal_weights(std::size_t nodes, std::size_t conditional);

/// Log-normal model of Z-hat / Z: conditional nodes ~ N(sigma^2/2, sigma^2) in log space,
/// unconditional nodes ~ N(-sigma^2/2, sigma^2).
struct LogNormalLimit {
  double sigma = 1.0;
};

struct SwitchEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

/// Monte Carlo estimate of the switching probability under the log-normal model.
/**
 * Trials are split into a fixed number of shards, each with its own stream derived
 * from `rng`, so the estimate does not depend on `workers`. Each trial consumes M
 * normals in the order: P conditional, then M - P unconditional. Calls with the same
 * stream and different P therefore share their underlying normals.
 */
[[nodiscard]] SwitchEstimate switch_probability_lognormal_mc(const LogNormalLimit& limit, std::size_t nodes,
                                                             std::size_t conditional, std::size_t trials,
                                                             const RandomStream& rng, std::size_t workers = 1);

/// Estimates for P = 1..M with common random numbers.
[[nodiscard]] std::vector<SwitchEstimate> switching_curve(const LogNormalLimit& limit, std::size_t nodes,
                                                          std::size_t trials, const RandomStream& rng,
                                                          std::size_t workers = 1);

/// Probability that a Gibbs loop leaves every slot on its node, given the realized Z-hat:
/// prod_j Z_{c_j} / (Z_{c_j} + sum_{m not in c} Z_m).
[[nodiscard]] double no_switch_probability(std::span<const double> log_evidence,
                                           std::span<const std::size_t> conditional);

/// Fraction of iterations in which some slot changed node.
[[nodiscard]] double empirical_switch_rate(const ChainSummary& summary);

}  // namespace ipmcmc

#endif  // IPMCMC_SWITCHING_HPP
