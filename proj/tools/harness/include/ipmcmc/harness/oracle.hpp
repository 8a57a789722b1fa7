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

#ifndef IPMCMC_HARNESS_ORACLE_HPP
#define IPMCMC_HARNESS_ORACLE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ipmcmc/estimators.hpp"
#include "ipmcmc/harness/config.hpp"
#include "ipmcmc/harness/dataset.hpp"

namespace ipmcmc::harness {

/// Exact posterior marginal moments, laid out like TestFunction::marginal_powers().
struct GroundTruth {
  std::size_t horizon = 0;
  std::size_t dim = 0;
  int max_power = 1;
  std::vector<double> moments;    // [(k - 1)][t][d]
  std::vector<double> variances;  // [t][d]
  double log_evidence = 0.0;

  [[nodiscard]] std::span<const double> means() const { return {moments.data(), horizon * dim}; }
};

/// RTS smoother moments for linear Gaussian models, enumeration for the HMM.
/// Throws NoOracleForModel for the nonlinear model.
[[nodiscard]] GroundTruth ground_truth(const ModelBundle& bundle, const Dataset& dataset, int max_power);

struct ReferenceHistogram {
  std::size_t step = 0;
  Histogram histogram;
};

/// Marginal histograms of x_t from `sweeps` independent SMC sweeps of `particles`
/// particles, each weighting its final paths by the final weights.
[[nodiscard]] std::vector<ReferenceHistogram> smc_reference_histograms(const ModelBundle& bundle,
                                                                       const Dataset& dataset,
                                                                       const OracleConfig& config,
                                                                       std::uint64_t seed);

}  // namespace ipmcmc::harness

#endif  // IPMCMC_HARNESS_ORACLE_HPP
