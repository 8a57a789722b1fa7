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

#include "ipmcmc/switching.hpp"

#include <cmath>
#include <limits>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/log_weights.hpp"
#include "parallel.hpp"

namespace ipmcmc {

namespace {

constexpr std::size_t kShards = 64;

void check_sizes(std::size_t nodes, std::size_t conditional) {
  if (nodes < 1) {
    throw InvalidConfig("nodes", "must be at least 1");
  }
  if (conditional < 1 || conditional > nodes) {
    throw InvalidConfig("conditional", "must lie in [1, nodes]");
  }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& other) {
    if (other.count == 0) {
      return;
    }
    const double total = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / total;
    m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / total;
    count += other.count;
  }
};

}  // namespace

double switch_probability_equal_weights(std::size_t nodes, std::size_t conditional) {
  check_sizes(nodes, conditional);
  const double free = static_cast<double>(nodes - conditional + 1);
  return -std::expm1(-static_cast<double>(conditional) * std::log(free));
}

SwitchEstimate switch_probability_lognormal_mc(const LogNormalLimit& limit, std::size_t nodes,
                                               std::size_t conditional, std::size_t trials,
                                               const RandomStream& rng, std::size_t workers) {
  check_sizes(nodes, conditional);
  if (!(limit.sigma > 0.0) || !std::isfinite(limit.sigma)) {
    throw InvalidConfig("sigma", "must be positive and finite");
  }
  if (trials < 1) {
    throw InvalidConfig("trials", "must be at least 1");
  }
  const double sigma = limit.sigma;
  const double half_var = 0.5 * sigma * sigma;
  const std::size_t shards = std::min(kShards, trials);
  std::vector<Moments> moments(shards);

  detail::for_each_index(shards, workers, [&](std::size_t k) {
    auto stream = rng.derive("shard", k);
    const std::size_t begin = trials * k / shards;
    const std::size_t end = trials * (k + 1) / shards;
    std::vector<double> cond(conditional);
    std::vector<double> free(nodes - conditional);
    for (std::size_t trial = begin; trial < end; ++trial) {
      for (auto& c : cond) {
        c = half_var + sigma * stream.normal();
      }
      for (auto& u : free) {
        u = -half_var + sigma * stream.normal();
      }
      double probability = 0.0;
      if (!free.empty()) {
        const double lse = log_sum_exp(free);
        double log_stay = 0.0;
        for (const double c : cond) {
          log_stay -= softplus(lse - c);
        }
        probability = -std::expm1(log_stay);
      }
      moments[k].add(probability);
    }
  });

  Moments total;
  for (const auto& m : moments) {
    total.merge(m);
  }
  SwitchEstimate out;
  out.trials = total.count;
  out.probability = total.mean;
  if (total.count > 1) {
    const double variance = total.m2 / static_cast<double>(total.count - 1);
    out.standard_error = std::sqrt(variance / static_cast<double>(total.count));
  }
  return out;
}

std::vector<SwitchEstimate> switching_curve(const LogNormalLimit& limit, std::size_t nodes, std::size_t trials,
                                            const RandomStream& rng, std::size_t workers) {
  std::vector<SwitchEstimate> curve;
  curve.reserve(nodes);
  for (std::size_t p = 1; p <= nodes; ++p) {
    curve.push_back(switch_probability_lognormal_mc(limit, nodes, p, trials, rng, workers));
  }
  return curve;
}

double no_switch_probability(std::span<const double> log_evidence, std::span<const std::size_t> conditional) {
  const std::size_t nodes = log_evidence.size();
  std::vector<char> held(nodes, 0);
  for (const auto c : conditional) {
    if (c >= nodes || held[c] != 0) {
      throw IndexOutOfRange("conditional indices must be distinct and below M");
    }
    held[c] = 1;
  }
  std::vector<double> free;
  for (std::size_t m = 0; m < nodes; ++m) {
    if (held[m] == 0) {
      free.push_back(log_evidence[m]);
    }
  }
  if (free.empty()) {
    return 1.0;
  }
  const double lse = log_sum_exp(free);
  double log_stay = 0.0;
  for (const auto c : conditional) {
    log_stay -= softplus(lse - log_evidence[c]);
  }
  return std::exp(log_stay);
}

double empirical_switch_rate(const ChainSummary& summary) { return summary.switch_rate(); }

}  // namespace ipmcmc
