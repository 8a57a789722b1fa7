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

#include "ipmcmc/models/discrete_hmm.hpp"

#include <cmath>
#include <limits>

#include "ipmcmc/errors.hpp"

namespace ipmcmc::models {

namespace {

void check_rows(const std::vector<double>& table, std::size_t rows, std::size_t cols, const char* name) {
  if (table.size() != rows * cols) {
    throw DimensionMismatch(std::string(name) + " has the wrong size");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = table[r * cols + c];
      if (!(p >= 0.0)) {
        throw InvalidWeight(std::string(name) + " has a negative entry");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidWeight(std::string(name) + " row does not sum to one");
    }
  }
}

std::size_t as_index(double value, std::size_t bound, const char* what) {
  const auto index = static_cast<std::size_t>(value);
  if (value < 0.0 || static_cast<double>(index) != value || index >= bound) {
    throw IndexOutOfRange(std::string(what) + " is not a valid integer code");
  }
  return index;
}

std::size_t draw(std::span<const double> probs, RandomStream& rng) { return rng.categorical(probs); }

double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

}  // namespace

void DiscreteHmm::validate() const {
  if (state_count == 0 || symbol_count == 0) {
    throw DimensionMismatch("HMM needs at least one state and one symbol");
  }
  check_rows(initial, 1, state_count, "initial");
  check_rows(transition, state_count, state_count, "transition");
  check_rows(emission, state_count, symbol_count, "emission");
}

DiscreteHmm two_state_hmm() {
  return DiscreteHmm{
      .state_count = 2,
      .symbol_count = 3,
      .initial = {0.6, 0.4},
      .transition = {0.8, 0.2, 0.3, 0.7},
      .emission = {0.6, 0.3, 0.1, 0.1, 0.3, 0.6},
  };
}

DiscreteHmmModel::DiscreteHmmModel(DiscreteHmm hmm) : hmm_(std::move(hmm)) { hmm_.validate(); }

double DiscreteHmmModel::log_initial(std::span<const double> x) const {
  return log_or_neg_inf(hmm_.initial[as_index(x[0], hmm_.state_count, "state")]);
}

double DiscreteHmmModel::log_transition(std::size_t /*t*/, const PathView& past, std::span<const double> x) const {
  const auto from = as_index(past.back()[0], hmm_.state_count, "state");
  return log_or_neg_inf(hmm_.transition_prob(from, as_index(x[0], hmm_.state_count, "state")));
}

double DiscreteHmmModel::log_observation(std::size_t /*t*/, const PathView& path, std::span<const double> y) const {
  const auto state = as_index(path.back()[0], hmm_.state_count, "state");
  return log_or_neg_inf(hmm_.emission_prob(state, as_index(y[0], hmm_.symbol_count, "symbol")));
}

void DiscreteHmmModel::sample_initial(RandomStream& rng, std::span<double> out) const {
  out[0] = static_cast<double>(draw(hmm_.initial, rng));
}

void DiscreteHmmModel::sample_transition(std::size_t /*t*/, const PathView& past, RandomStream& rng,
                                         std::span<double> out) const {
  const auto from = as_index(past.back()[0], hmm_.state_count, "state");
  const std::span<const double> row(hmm_.transition.data() + from * hmm_.state_count, hmm_.state_count);
  out[0] = static_cast<double>(draw(row, rng));
}

HmmSample hmm_simulate(const DiscreteHmm& hmm, std::size_t horizon, RandomStream& rng) {
  hmm.validate();
  std::vector<double> xs(horizon);
  std::vector<double> ys(horizon);
  std::size_t state = 0;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (t == 0) {
      state = draw(hmm.initial, rng);
    } else {
      state = draw(std::span<const double>(hmm.transition.data() + state * hmm.state_count, hmm.state_count), rng);
    }
    xs[t] = static_cast<double>(state);
    ys[t] = static_cast<double>(
        draw(std::span<const double>(hmm.emission.data() + state * hmm.symbol_count, hmm.symbol_count), rng));
  }
  return {Trajectory(horizon, 1, std::move(xs)), Observations(horizon, 1, std::move(ys))};
}

std::size_t path_index(const Trajectory& path, std::size_t state_count) {
  std::size_t index = 0;
  for (std::size_t t = 0; t < path.horizon(); ++t) {
    index = index * state_count + as_index(path.at(t)[0], state_count, "state");
  }
  return index;
}

Trajectory path_from_index(std::size_t index, std::size_t state_count, std::size_t horizon) {
  Trajectory path(horizon, 1);
  for (std::size_t t = horizon; t-- > 0;) {
    path.at(t)[0] = static_cast<double>(index % state_count);
    index /= state_count;
  }
  return path;
}

HmmPosterior hmm_exact_posterior(const DiscreteHmm& hmm, const Observations& observations, std::size_t max_paths) {
  hmm.validate();
  const std::size_t horizon = observations.horizon();
  const std::size_t s = hmm.state_count;
  std::size_t path_count = 1;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (path_count > max_paths / s) {
      throw EnumerationTooLarge("S^T exceeds the enumeration limit of " + std::to_string(max_paths));
    }
    path_count *= s;
  }

  std::vector<std::size_t> symbols(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    symbols[t] = as_index(observations.at(t)[0], hmm.symbol_count, "symbol");
  }

  HmmPosterior out;
  out.path_probabilities.resize(path_count);
  std::vector<std::size_t> states(horizon);
  double evidence = 0.0;
  for (std::size_t index = 0; index < path_count; ++index) {
    std::size_t rest = index;
    for (std::size_t t = horizon; t-- > 0;) {
      states[t] = rest % s;
      rest /= s;
    }
    double joint = hmm.initial[states[0]] * hmm.emission_prob(states[0], symbols[0]);
    for (std::size_t t = 1; t < horizon; ++t) {
      joint *= hmm.transition_prob(states[t - 1], states[t]) * hmm.emission_prob(states[t], symbols[t]);
    }
    out.path_probabilities[index] = joint;
    evidence += joint;
  }
  if (!(evidence > 0.0)) {
    throw AllZeroWeights();
  }
  out.log_evidence = std::log(evidence);
  out.marginals.assign(horizon * s, 0.0);
  for (std::size_t index = 0; index < path_count; ++index) {
    double& p = out.path_probabilities[index];
    p /= evidence;
    std::size_t rest = index;
    for (std::size_t t = horizon; t-- > 0;) {
      out.marginals[t * s + rest % s] += p;
      rest /= s;
    }
  }
  return out;
}

HmmPosterior hmm_forward_backward(const DiscreteHmm& hmm, const Observations& observations) {
  hmm.validate();
  const std::size_t horizon = observations.horizon();
  const std::size_t s = hmm.state_count;
  std::vector<double> alpha(horizon * s);
  std::vector<double> beta(horizon * s, 1.0);
  std::vector<double> scale(horizon);
  std::vector<std::size_t> symbols(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    symbols[t] = as_index(observations.at(t)[0], hmm.symbol_count, "symbol");
  }

  HmmPosterior out;
  for (std::size_t t = 0; t < horizon; ++t) {
    double total = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      double prior = 0.0;
      if (t == 0) {
        prior = hmm.initial[j];
      } else {
        for (std::size_t i = 0; i < s; ++i) {
          prior += alpha[(t - 1) * s + i] * hmm.transition_prob(i, j);
        }
      }
      alpha[t * s + j] = prior * hmm.emission_prob(j, symbols[t]);
      total += alpha[t * s + j];
    }
    if (!(total > 0.0)) {
      throw AllZeroWeights(t);
    }
    scale[t] = total;
    for (std::size_t j = 0; j < s; ++j) {
      alpha[t * s + j] /= total;
    }
    out.log_evidence += std::log(total);
  }
  for (std::size_t t = horizon - 1; t-- > 0;) {
    for (std::size_t i = 0; i < s; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j) {
        acc += hmm.transition_prob(i, j) * hmm.emission_prob(j, symbols[t + 1]) * beta[(t + 1) * s + j];
      }
      beta[t * s + i] = acc / scale[t + 1];
    }
  }
  out.marginals.resize(horizon * s);
  for (std::size_t t = 0; t < horizon; ++t) {
    double total = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      out.marginals[t * s + j] = alpha[t * s + j] * beta[t * s + j];
      total += out.marginals[t * s + j];
    }
    for (std::size_t j = 0; j < s; ++j) {
      out.marginals[t * s + j] /= total;
    }
  }
  return out;
}

}  // namespace ipmcmc::models
