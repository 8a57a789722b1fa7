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

#include "ipmcmc/log_weights.hpp"

#include <cmath>
#include <limits>

#include "ipmcmc/errors.hpp"

namespace ipmcmc {

namespace {

// Validates the input and returns its maximum, which is always finite on return.
double checked_max(std::span<const double> log_weights) {
  if (log_weights.empty()) {
    throw AllZeroWeights();
  }
  double max = -std::numeric_limits<double>::infinity();
  for (const double lw : log_weights) {
    if (std::isnan(lw)) {
      throw InvalidWeight("log-weight is NaN");
    }
    if (lw == std::numeric_limits<double>::infinity()) {
      throw InvalidWeight("log-weight is +inf");
    }
    if (lw > max) {
      max = lw;
    }
  }
  if (std::isinf(max)) {
    throw AllZeroWeights();
  }
  return max;
}

// sum_i exp(lw_i - max); at least 1 because the maximum contributes exp(0).
double shifted_sum(std::span<const double> log_weights, double max) {
  double sum = 0.0;
  for (const double lw : log_weights) {
    sum += std::exp(lw - max);
  }
  return sum;
}

}  // namespace

void normalize_log_weights(std::span<const double> log_weights, std::span<double> out) {
  if (out.size() != log_weights.size()) {
    throw DimensionMismatch("normalize_log_weights: output size differs from input size");
  }
  const double max = checked_max(log_weights);
  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    out[i] = std::exp(log_weights[i] - max);
    sum += out[i];
  }
  const double inverse = 1.0 / sum;
  for (double& w : out) {
    w *= inverse;
  }
}

std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
  std::vector<double> out(log_weights.size());
  normalize_log_weights(log_weights, out);
  return out;
}

double log_sum_exp(std::span<const double> log_weights) {
  const double max = checked_max(log_weights);
  return max + std::log(shifted_sum(log_weights, max));
}

double log_mean_exp(std::span<const double> log_weights) {
  const double max = checked_max(log_weights);
  return max + std::log(shifted_sum(log_weights, max) / static_cast<double>(log_weights.size()));
}

}  // namespace ipmcmc
