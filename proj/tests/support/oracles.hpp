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

#ifndef IPMCMC_TESTS_SUPPORT_ORACLES_HPP
#define IPMCMC_TESTS_SUPPORT_ORACLES_HPP

#include <cstddef>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ipmcmc/model.hpp"
#include "ipmcmc/sweep.hpp"

// Independent reference computations used only by tests. None of these call into the
// code they check.
namespace ipmcmc::testing {

/// exp(lw - max) / sum in long double.
[[nodiscard]] std::vector<long double> normalize_extended(std::span<const double> log_weights);

/// log((1/N) sum exp(lw)) by direct long double summation, no shift.
[[nodiscard]] long double log_mean_exp_extended(std::span<const double> log_weights);

/// log Z-hat computed as the log of a product of linear-domain weight means.
[[nodiscard]] double linear_domain_log_evidence(const SweepResult& sweep);

/// Full paths of every particle at the final step, built forward by copying each
/// parent's history and appending the new state.
[[nodiscard]] std::vector<Trajectory> stored_history_paths(const SweepResult& sweep);

/// Scalar linear Gaussian model solved by quadrature on a uniform grid.
struct ScalarLgssm {
  double initial_mean = 0.0;
  double initial_var = 1.0;
  double transition = 0.9;
  double transition_var = 0.5;
  double emission = 1.0;
  double emission_var = 1.0;
};

struct GridPosterior {
  double log_evidence = 0.0;
  std::vector<double> filtered_means;
  std::vector<double> filtered_vars;
  std::vector<double> smoothed_means;
  std::vector<double> smoothed_vars;
};

[[nodiscard]] GridPosterior grid_posterior(const ScalarLgssm& model, std::span<const double> observations,
                                           double lo, double hi, std::size_t points);

/// Upper tail p-value of Pearson's chi-square statistic for observed counts.
[[nodiscard]] double chi_square_p_value(std::span<const std::size_t> counts, std::span<const double> probs);

/// Asymptotic p-value of the one-sample Kolmogorov-Smirnov statistic against `cdf`.
template <typename Cdf>
[[nodiscard]] double ks_p_value(std::vector<double> sample, Cdf cdf);
[[nodiscard]] double kolmogorov_tail(double lambda);

/// Half the L1 distance between an empirical histogram and a probability vector.
[[nodiscard]] double tv_distance(std::span<const std::size_t> counts, std::span<const double> probs);

template <typename Cdf>
double ks_p_value(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  return kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
}

}  // namespace ipmcmc::testing

#endif  // IPMCMC_TESTS_SUPPORT_ORACLES_HPP
