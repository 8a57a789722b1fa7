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

#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

namespace ipmcmc::testing {

std::vector<long double> normalize_extended(std::span<const double> log_weights) {
  long double top = -INFINITY;
  for (const double w : log_weights) {
    top = std::max(top, static_cast<long double>(w));
  }
  std::vector<long double> out(log_weights.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(static_cast<long double>(log_weights[i]) - top);
    total += out[i];
  }
  for (auto& p : out) {
    p /= total;
  }
  return out;
}

long double log_mean_exp_extended(std::span<const double> log_weights) {
  long double total = 0.0L;
  for (const double w : log_weights) {
    total += std::exp(static_cast<long double>(w));
  }
  return std::log(total / static_cast<long double>(log_weights.size()));
}

double linear_domain_log_evidence(const SweepResult& sweep) {
  long double z = 1.0L;
  for (std::size_t t = 0; t < sweep.horizon(); ++t) {
    long double mean = 0.0L;
    for (const double w : sweep.log_weights(t)) {
      mean += std::exp(static_cast<long double>(w));
    }
    z *= mean / static_cast<long double>(sweep.particle_count());
  }
  return static_cast<double>(std::log(z));
}

std::vector<Trajectory> stored_history_paths(const SweepResult& sweep) {
  const std::size_t n = sweep.particle_count();
  const std::size_t dim = sweep.state_dim();
  std::vector<std::vector<double>> histories(n);
  for (std::size_t t = 0; t < sweep.horizon(); ++t) {
    std::vector<std::vector<double>> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (t > 0) {
        next[i] = histories[sweep.ancestor(t, i)];
      }
      const auto x = sweep.state(t, i);
      next[i].insert(next[i].end(), x.begin(), x.end());
    }
    histories = std::move(next);
  }
  std::vector<Trajectory> out;
  out.reserve(n);
  for (auto& h : histories) {
    out.emplace_back(sweep.horizon(), dim, std::move(h));
  }
  return out;
}

namespace {

double normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Trapezoid rule weights on a uniform grid.
std::vector<double> trapezoid(std::size_t points, double h) {
  std::vector<double> w(points, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

void moments(const std::vector<double>& grid, const std::vector<double>& density, const std::vector<double>& w,
             double& mean, double& var) {
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double p = density[k] * w[k];
    mass += p;
    first += p * grid[k];
    second += p * grid[k] * grid[k];
  }
  mean = first / mass;
  var = second / mass - mean * mean;
}

}  // namespace

GridPosterior grid_posterior(const ScalarLgssm& model, std::span<const double> observations, double lo,
                             double hi, std::size_t points) {
  const std::size_t horizon = observations.size();
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = lo + h * static_cast<double>(k);
  }
  const auto w = trapezoid(points, h);
  std::vector<std::vector<double>> kernel(points, std::vector<double>(points));
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = 0; j < points; ++j) {
      kernel[i][j] = normal_pdf(grid[j], model.transition * grid[i], model.transition_var);  // [from][to]
    }
  }
  auto likelihood = [&](std::size_t t, std::size_t k) {
    return normal_pdf(observations[t], model.emission * grid[k], model.emission_var);
  };

  GridPosterior out;
  std::vector<std::vector<double>> filtered(horizon, std::vector<double>(points));
  std::vector<double> scale(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<double> predicted(points);
    for (std::size_t j = 0; j < points; ++j) {
      if (t == 0) {
        predicted[j] = normal_pdf(grid[j], model.initial_mean, model.initial_var);
      } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < points; ++i) {
          acc += w[i] * filtered[t - 1][i] * kernel[i][j];
        }
        predicted[j] = acc;
      }
    }
    double c = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
      filtered[t][j] = predicted[j] * likelihood(t, j);
      c += w[j] * filtered[t][j];
    }
    for (auto& f : filtered[t]) {
      f /= c;
    }
    scale[t] = c;
    out.log_evidence += std::log(c);
    double mean = 0.0;
    double var = 0.0;
    moments(grid, filtered[t], w, mean, var);
    out.filtered_means.push_back(mean);
    out.filtered_vars.push_back(var);
  }

  std::vector<double> beta(points, 1.0);
  out.smoothed_means.resize(horizon);
  out.smoothed_vars.resize(horizon);
  for (std::size_t t = horizon; t-- > 0;) {
    if (t + 1 < horizon) {
      std::vector<double> next(points);
      for (std::size_t i = 0; i < points; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < points; ++j) {
          acc += w[j] * kernel[i][j] * likelihood(t + 1, j) * beta[j];
        }
        next[i] = acc / scale[t + 1];
      }
      beta = std::move(next);
    }
    std::vector<double> smoothed(points);
    for (std::size_t k = 0; k < points; ++k) {
      smoothed[k] = filtered[t][k] * beta[k];
    }
    moments(grid, smoothed, w, out.smoothed_means[t], out.smoothed_vars[t]);
  }
  return out;
}

double chi_square_p_value(std::span<const std::size_t> counts, std::span<const double> probs) {
  double total = 0.0;
  for (const auto c : counts) {
    total += static_cast<double>(c);
  }
  double statistic = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (probs[k] <= 0.0) {
      continue;
    }
    const double expected = total * probs[k];
    const double diff = static_cast<double>(counts[k]) - expected;
    statistic += diff * diff / expected;
    ++cells;
  }
  const boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) {
    return 1.0;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) {
      break;
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

double tv_distance(std::span<const std::size_t> counts, std::span<const double> probs) {
  double total = 0.0;
  for (const auto c : counts) {
    total += static_cast<double>(c);
  }
  double distance = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    distance += std::abs(static_cast<double>(counts[k]) / total - probs[k]);
  }
  return 0.5 * distance;
}

}  // namespace ipmcmc::testing
