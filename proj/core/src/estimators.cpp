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

#include "ipmcmc/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "ipmcmc/errors.hpp"

namespace ipmcmc {

namespace {

void check_zeta(std::span<const double> zeta, std::size_t slots, std::size_t nodes) {
  if (slots == 0 || zeta.size() != slots * nodes) {
    throw DimensionMismatch("zeta must be P x M");
  }
  for (std::size_t j = 0; j < slots; ++j) {
    double total = 0.0;
    for (std::size_t m = 0; m < nodes; ++m) {
      total += zeta[j * nodes + m];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidWeight("zeta row does not sum to one");
    }
  }
}

// Unnormalized node weights sum_j zeta_m^j / P; multiplying by 1/R gives eta.
std::vector<double> node_shares(std::span<const double> zeta, std::size_t slots, std::size_t nodes) {
  std::vector<double> shares(nodes, 0.0);
  for (std::size_t j = 0; j < slots; ++j) {
    for (std::size_t m = 0; m < nodes; ++m) {
      shares[m] += zeta[j * nodes + m];
    }
  }
  for (auto& s : shares) {
    s /= static_cast<double>(slots);
  }
  return shares;
}

// mass[t][s]: total final weight of the paths passing through slot s at step t.
std::vector<double> slot_mass(const SweepResult& sweep, std::span<const std::uint32_t> lineages,
                              std::span<const double> weights) {
  const std::size_t n = sweep.particle_count();
  std::vector<double> mass(sweep.horizon() * n, 0.0);
  for (std::size_t t = 0; t < sweep.horizon(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      mass[t * n + lineages[t * n + i]] += weights[i];
    }
  }
  return mass;
}

}  // namespace

std::vector<double> final_slot_mass(const SweepResult& sweep) {
  return slot_mass(sweep, final_lineages(sweep), final_weights(sweep));
}

TestFunction::TestFunction(std::size_t output_dim, Evaluator evaluator)
    : output_dim_(output_dim), evaluator_(std::move(evaluator)) {}

TestFunction TestFunction::marginal_powers(std::size_t horizon, std::size_t dim, int max_power) {
  if (max_power < 1) {
    throw DimensionMismatch("max_power must be at least 1");
  }
  const std::size_t block = horizon * dim;
  TestFunction f(block * static_cast<std::size_t>(max_power),
                 [block, max_power](const Trajectory& path, std::span<double> out) {
                   const auto values = path.values();
                   if (values.size() != block) {
                     throw DimensionMismatch("trajectory shape does not match the test function");
                   }
                   for (std::size_t e = 0; e < block; ++e) {
                     double power = values[e];
                     for (int k = 0; k < max_power; ++k) {
                       out[static_cast<std::size_t>(k) * block + e] = power;
                       power *= values[e];
                     }
                   }
                 });
  f.max_power_ = max_power;
  return f;
}

void TestFunction::evaluate(const Trajectory& path, std::span<double> out) const {
  if (out.size() != output_dim_) {
    throw DimensionMismatch("test function output has the wrong size");
  }
  evaluator_(path, out);
}

std::vector<double> TestFunction::operator()(const Trajectory& path) const {
  std::vector<double> out(output_dim_);
  evaluate(path, out);
  return out;
}

std::vector<double> mc_estimate(std::span<const Trajectory> samples, const TestFunction& f) {
  if (samples.empty()) {
    throw EmptyRecord();
  }
  RunningMean mean(f.output_dim());
  std::vector<double> value(f.output_dim());
  for (const auto& path : samples) {
    f.evaluate(path, value);
    mean.add(value);
  }
  return mean.mean();
}

std::vector<double> node_expectation(const SweepResult& sweep, const TestFunction& f) {
  const auto weights = final_weights(sweep);
  std::vector<double> out(f.output_dim(), 0.0);
  if (f.marginal_power() > 0) {
    const std::size_t n = sweep.particle_count();
    const std::size_t dim = sweep.state_dim();
    const std::size_t block = sweep.horizon() * dim;
    if (f.output_dim() != block * static_cast<std::size_t>(f.marginal_power())) {
      throw DimensionMismatch("test function shape does not match the sweep");
    }
    const auto lineages = final_lineages(sweep);
    const auto mass = slot_mass(sweep, lineages, weights);
    for (std::size_t t = 0; t < sweep.horizon(); ++t) {
      for (std::size_t s = 0; s < n; ++s) {
        const double w = mass[t * n + s];
        if (w == 0.0) {
          continue;
        }
        const auto x = sweep.state(t, s);
        for (std::size_t d = 0; d < dim; ++d) {
          double power = x[d];
          for (int k = 0; k < f.marginal_power(); ++k) {
            out[static_cast<std::size_t>(k) * block + t * dim + d] += w * power;
            power *= x[d];
          }
        }
      }
    }
    return out;
  }
  const auto paths = extract_all_trajectories(sweep);
  std::vector<double> value(f.output_dim());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (weights[i] == 0.0) {
      continue;
    }
    f.evaluate(paths[i], value);
    for (std::size_t k = 0; k < value.size(); ++k) {
      out[k] += weights[i] * value[k];
    }
  }
  return out;
}

std::vector<double> rao_blackwellized_combine(std::span<const double> node_expectations, std::size_t output_dim,
                                              std::span<const double> zeta, std::size_t slots) {
  if (output_dim == 0 || node_expectations.size() % output_dim != 0) {
    throw DimensionMismatch("node expectations are not M x K");
  }
  const std::size_t nodes = node_expectations.size() / output_dim;
  check_zeta(zeta, slots, nodes);
  const auto shares = node_shares(zeta, slots, nodes);
  std::vector<double> out(output_dim, 0.0);
  for (std::size_t m = 0; m < nodes; ++m) {
    if (shares[m] == 0.0) {
      continue;
    }
    for (std::size_t k = 0; k < output_dim; ++k) {
      out[k] += shares[m] * node_expectations[m * output_dim + k];
    }
  }
  return out;
}

std::vector<double> rao_blackwellized_estimate(std::span<const std::shared_ptr<const SweepResult>> sweeps,
                                               std::span<const double> zeta, std::size_t slots,
                                               const TestFunction& f) {
  const std::size_t nodes = sweeps.size();
  check_zeta(zeta, slots, nodes);
  const std::size_t k = f.output_dim();
  std::vector<double> expectations(nodes * k, 0.0);
  const auto shares = node_shares(zeta, slots, nodes);
  for (std::size_t m = 0; m < nodes; ++m) {
    if (shares[m] == 0.0) {
      continue;
    }
    const auto e = node_expectation(*sweeps[m], f);
    std::copy(e.begin(), e.end(), expectations.begin() + static_cast<std::ptrdiff_t>(m * k));
  }
  return rao_blackwellized_combine(expectations, k, zeta, slots);
}

std::vector<double> node_weights(std::span<const double> zeta, std::size_t slots, std::size_t nodes,
                                 std::size_t iterations) {
  check_zeta(zeta, slots, nodes);
  if (iterations == 0) {
    throw EmptyRecord();
  }
  auto eta = node_shares(zeta, slots, nodes);
  for (auto& e : eta) {
    e /= static_cast<double>(iterations);
  }
  return eta;
}

std::uint64_t UniqueSampleTable::hash(std::span<const double> value) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const double v : value) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return h;
}

void UniqueSampleTable::add(std::span<const double> value, double weight) {
  if (value.size() != dim_) {
    throw DimensionMismatch("sample dimension does not match the table");
  }
  if (!(weight >= 0.0) || std::isinf(weight)) {
    throw InvalidWeight("sample weight is negative or not finite");
  }
  const auto key = hash(value);
  const auto [first, last] = index_.equal_range(key);
  for (auto it = first; it != last; ++it) {
    const std::size_t k = it->second;
    if (std::memcmp(values_.data() + k * dim_, value.data(), dim_ * sizeof(double)) == 0) {
      weights_[k] += weight;
      touched_[k] = epoch_;
      total_ += weight;
      return;
    }
  }
  index_.emplace(key, weights_.size());
  values_.insert(values_.end(), value.begin(), value.end());
  weights_.push_back(weight);
  touched_.push_back(epoch_);
  total_ += weight;
}

std::vector<double> UniqueSampleTable::normalized_weights() const {
  std::vector<double> out(weights_);
  if (total_ > 0.0) {
    for (auto& w : out) {
      w /= total_;
    }
  }
  return out;
}

double UniqueSampleTable::ess() const {
  if (!(total_ > 0.0)) {
    throw EmptyRecord();
  }
  double squares = retired_squares_;
  for (const double w : weights_) {
    squares += w * w;
  }
  return total_ * total_ / squares;
}

void UniqueSampleTable::retire_untouched() {
  std::vector<double> values;
  std::vector<double> weights;
  std::vector<std::uint64_t> touched;
  index_.clear();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (touched_[k] != epoch_) {
      retired_squares_ += weights_[k] * weights_[k];
      ++retired_count_;
      continue;
    }
    const auto value = this->value(k);
    index_.emplace(hash(value), weights.size());
    values.insert(values.end(), value.begin(), value.end());
    weights.push_back(weights_[k]);
    touched.push_back(touched_[k]);
  }
  values_ = std::move(values);
  weights_ = std::move(weights);
  touched_ = std::move(touched);
}

EssAccumulator::EssAccumulator(std::size_t horizon, std::size_t dim, bool retire)
    : horizon_(horizon), retire_(retire), tables_(horizon, UniqueSampleTable(dim)) {}

void EssAccumulator::add(const IterationRecord& record) {
  if (record.initialization) {
    return;
  }
  const auto shares = node_shares(record.zeta, record.slots(), record.nodes());
  for (std::size_t m = 0; m < record.nodes(); ++m) {
    if (shares[m] > 0.0) {
      add_sweep(*record.sweeps[m], shares[m]);
    }
  }
  end_record();
}

void EssAccumulator::add_sweep(const SweepResult& sweep, double eta) {
  if (sweep.horizon() != horizon_) {
    throw DimensionMismatch("sweep horizon does not match the accumulator");
  }
  const std::size_t n = sweep.particle_count();
  slot_mass_ = final_slot_mass(sweep);
  for (std::size_t t = 0; t < horizon_; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      const double w = slot_mass_[t * n + s];
      if (w > 0.0) {
        add_entry(t, sweep.state(t, s), eta * w);
      }
    }
  }
}

void EssAccumulator::add_entry(std::size_t t, std::span<const double> value, double weight) {
  tables_.at(t).add(value, weight);
}

void EssAccumulator::end_record() {
  ++records_;
  for (auto& table : tables_) {
    if (retire_) {
      table.retire_untouched();
    }
    table.begin_epoch();
  }
}

std::vector<double> EssAccumulator::ess() const {
  std::vector<double> out(horizon_);
  for (std::size_t t = 0; t < horizon_; ++t) {
    out[t] = tables_[t].ess();
  }
  return out;
}

std::vector<double> ess_per_step(std::span<const IterationRecord> records) {
  const IterationRecord* first = nullptr;
  for (const auto& record : records) {
    if (!record.initialization && record.nodes() > 0) {
      first = &record;
      break;
    }
  }
  if (first == nullptr) {
    throw EmptyRecord();
  }
  const auto& sweep = *first->sweeps[0];
  EssAccumulator accumulator(sweep.horizon(), sweep.state_dim(), false);
  for (const auto& record : records) {
    accumulator.add(record);
  }
  return accumulator.ess();
}

std::vector<double> Histogram::density() const {
  double total = 0.0;
  for (const double m : mass) {
    total += m;
  }
  std::vector<double> out(mass.size(), 0.0);
  if (total > 0.0) {
    const double width = (hi - lo) / static_cast<double>(mass.size());
    for (std::size_t b = 0; b < mass.size(); ++b) {
      out[b] = mass[b] / (total * width);
    }
  }
  return out;
}

namespace {

void deposit(Histogram& histogram, double value, double weight) {
  if (!(value >= histogram.lo) || !(value < histogram.hi)) {
    return;
  }
  const auto bins = histogram.mass.size();
  auto b = static_cast<std::size_t>((value - histogram.lo) / (histogram.hi - histogram.lo) *
                                    static_cast<double>(bins));
  histogram.mass[std::min(b, bins - 1)] += weight;
}

Histogram empty_histogram(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) {
    throw DimensionMismatch("histogram needs at least one bin and hi > lo");
  }
  return {lo, hi, std::vector<double>(bins, 0.0)};
}

}  // namespace

Histogram weighted_histogram(std::span<const double> values, std::span<const double> weights, double lo,
                             double hi, std::size_t bins) {
  if (values.size() != weights.size()) {
    throw DimensionMismatch("values and weights differ in length");
  }
  auto histogram = empty_histogram(lo, hi, bins);
  for (std::size_t k = 0; k < values.size(); ++k) {
    deposit(histogram, values[k], weights[k]);
  }
  return histogram;
}

HistogramAccumulator::HistogramAccumulator(std::size_t step, std::size_t component, double lo, double hi,
                                           std::size_t bins)
    : step_(step), component_(component), histogram_(empty_histogram(lo, hi, bins)) {}

void HistogramAccumulator::add(const IterationRecord& record) {
  if (record.initialization) {
    return;
  }
  const auto shares = node_shares(record.zeta, record.slots(), record.nodes());
  for (std::size_t m = 0; m < record.nodes(); ++m) {
    if (shares[m] == 0.0) {
      continue;
    }
    const auto& sweep = *record.sweeps[m];
    const std::size_t n = sweep.particle_count();
    const auto weights = final_weights(sweep);
    const auto lineages = final_lineages(sweep);
    for (std::size_t i = 0; i < n; ++i) {
      deposit(histogram_, sweep.state(step_, lineages[step_ * n + i])[component_], shares[m] * weights[i]);
    }
  }
}

void RunningMean::add(std::span<const double> value) {
  if (value.size() != sum_.size()) {
    throw DimensionMismatch("running mean input has the wrong size");
  }
  for (std::size_t k = 0; k < value.size(); ++k) {
    sum_[k] += value[k];
  }
  ++count_;
}

std::vector<double> RunningMean::mean() const {
  if (count_ == 0) {
    throw EmptyRecord();
  }
  std::vector<double> out(sum_);
  for (auto& v : out) {
    v /= static_cast<double>(count_);
  }
  return out;
}

double mean_squared_error(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size() || estimate.empty()) {
    throw DimensionMismatch("estimate and truth differ in size");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    const double e = estimate[k] - truth[k];
    total += e * e;
  }
  return total / static_cast<double>(estimate.size());
}

std::vector<double> mse_per_step(std::span<const double> estimate, std::span<const double> truth, std::size_t dim) {
  if (estimate.size() != truth.size() || dim == 0 || estimate.size() % dim != 0) {
    throw DimensionMismatch("estimate and truth must both be T x D");
  }
  const std::size_t horizon = estimate.size() / dim;
  std::vector<double> out(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    out[t] = mean_squared_error(estimate.subspan(t * dim, dim), truth.subspan(t * dim, dim));
  }
  return out;
}

}  // namespace ipmcmc
