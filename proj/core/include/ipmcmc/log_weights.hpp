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

#ifndef IPMCMC_LOG_WEIGHTS_HPP
#define IPMCMC_LOG_WEIGHTS_HPP

#include <span>
#include <vector>

/**
 * \file
 * \brief Max-shifted arithmetic on log-domain importance weights.
 *
 * All weights in this library are kept in log domain. A weight of zero is
 * represented by -inf. NaN and +inf are rejected with InvalidWeight, and a vector
 * in which every entry is -inf raises AllZeroWeights.
 */

namespace ipmcmc {

/// Maps log-weights to a probability vector proportional to exp(lw - max(lw)).
/**
 * Entries equal to -inf map to exactly 0. The result sums to one up to rounding.
 */
[[nodiscard]] std::vector<double> normalize_log_weights(std::span<const double> log_weights);

/// Non-allocating variant of normalize_log_weights(); `out` must have the same size.
void normalize_log_weights(std::span<const double> log_weights, std::span<double> out);

/// log(sum_i exp(lw_i)) evaluated with a max shift.
[[nodiscard]] double log_sum_exp(std::span<const double> log_weights);

/// log((1/N) sum_i exp(lw_i)); one factor of the marginal likelihood estimate.
[[nodiscard]] double log_mean_exp(std::span<const double> log_weights);

}  // namespace ipmcmc

#endif  // IPMCMC_LOG_WEIGHTS_HPP
