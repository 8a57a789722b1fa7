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

#ifndef IPMCMC_ESTIMATORS_HPP
#define IPMCMC_ESTIMATORS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "ipmcmc/engine.hpp"
#include "ipmcmc/model.hpp"
#include "ipmcmc/sweep.hpp"

/**
 * \file
 * \brief Expectations and diagnostics computed from chain records.
 */

namespace ipmcmc {

/// A vector-valued function of a full latent path.
class TestFunction {
 public:
  using Evaluator = std::function<void(const Trajectory&, std::span<double>)>;

  TestFunction(std::size_t output_dim, Evaluator evaluator);

  /// Per-step power moments: output[(k - 1) T D + t D + d] = x_t[d]^k for k = 1..max_power.
  [[nodiscard]] static TestFunction marginal_powers(std::size_t horizon, std::size_t dim, int max_power);

  [[nodiscard]] std::size_t output_dim() const noexcept { return output_dim_; }
  void evaluate(const Trajectory& path, std::span<double> out) const;
  [[nodiscard]] std::vector<double> operator()(const Trajectory& path) const;

  /// Set for marginal_powers(); lets estimators skip path extraction.
  [[nodiscard]] int marginal_power() const noexcept { return max_power_; }

 private:
  std::size_t output_dim_;
  Evaluator evaluator_;
  int max_power_ = 0;
};

/// Mean of f over the retained samples. Throws EmptyRecord when `samples` is empty.
[[nodiscard]] std::vector<double> mc_estimate(std::span<const Trajectory> samples, const TestFunction& f);

/// Laid out [t][slot]: total normalized final weight of the paths through each slot.
[[nodiscard]] std::vector<double> final_slot_mass(const SweepResult& sweep);

/// Sum over final particles of w-bar_T^i f(x^i) for one sweep.
[[nodiscard]] std::vector<double> node_expectation(const SweepResult& sweep, const TestFunction& f);

/// Combines per-node expectations [node][k] with the slot weights [slot][node]:
/// (1/P) sum_m (sum_j zeta_m^j) E_m.
[[nodiscard]] std::vector<double> rao_blackwellized_combine(std::span<const double> node_expectations,
                                                            std::size_t output_dim,
                                                            std::span<const double> zeta,
                                                            std::size_t slots);

/// Rao-Blackwellized all-particle estimate of one iteration.
/**
 * Throws DimensionMismatch when zeta is not P x M, and InvalidWeight when a zeta row
 * does not sum to one within 1e-9.
 */
[[nodiscard]] std::vector<double> rao_blackwellized_estimate(
    std::span<const std::shared_ptr<const SweepResult>> sweeps, std::span<const double> zeta,
    std::size_t slots, const TestFunction& f);

/// eta_m = (1 / (R P)) sum_j zeta_m^j. Identity slot weights give 1 / (R M).
[[nodiscard]] std::vector<double> node_weights(std::span<const double> zeta, std::size_t slots,
                                               std::size_t nodes, std::size_t iterations);

/// Weighted unique values of x_t, condensed by bit-exact equality of the state vector.
/**
 * Weights are accumulated unnormalized; ess() is scale invariant. In streaming mode
 * entries not seen during an epoch can be retired: their weight stays in the totals
 * but their key is dropped. That is only valid when a value that disappears can never
 * come back, which holds for continuous states.
 */
class UniqueSampleTable {
 public:
  explicit UniqueSampleTable(std::size_t dim) : dim_(dim) {}

  void add(std::span<const double> value, double weight);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  /// Active (not retired) unique values.
  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
  /// Total number of unique values ever seen, retired ones included.
  [[nodiscard]] std::size_t unique_count() const noexcept { return retired_count_ + weights_.size(); }
  [[nodiscard]] std::span<const double> value(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  /// Weights of active values normalized by the total weight.
  [[nodiscard]] std::vector<double> normalized_weights() const;
  [[nodiscard]] double total_weight() const noexcept { return total_; }

  /// (sum v)^2 / sum v^2, which equals 1 / sum v^2 once v is normalized.
  [[nodiscard]] double ess() const;

  void begin_epoch() noexcept { ++epoch_; }
  /// Drops entries untouched since begin_epoch().
  void retire_untouched();

 private:
  [[nodiscard]] std::uint64_t hash(std::span<const double> value) const;

  std::size_t dim_;
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<std::uint64_t> touched_;
  std::unordered_multimap<std::uint64_t, std::size_t> index_;
  double total_ = 0.0;
  double retired_squares_ = 0.0;
  std::size_t retired_count_ = 0;
  std::uint64_t epoch_ = 0;
};

/// ESS_t for t = 0..T-1 accumulated over records.
/**
 * Record r contributes, for every node m and final particle i, the t-th state of
 * path i weighted by w-bar_T^i eta_m with eta_m proportional to sum_j zeta_m^j.
 * Initialization records are skipped.
 */
class EssAccumulator {
 public:
  EssAccumulator(std::size_t horizon, std::size_t dim, bool retire);

  void add(const IterationRecord& record);
  /// Adds one node's particle system with node weight `eta`.
  void add_sweep(const SweepResult& sweep, double eta);
  /// Adds one weighted value at step t; add_sweep() is a loop over these.
  void add_entry(std::size_t t, std::span<const double> value, double weight);
  void end_record();

  [[nodiscard]] std::vector<double> ess() const;
  [[nodiscard]] std::size_t records() const noexcept { return records_; }
  [[nodiscard]] const UniqueSampleTable& table(std::size_t t) const { return tables_.at(t); }

 private:
  std::size_t horizon_;
  bool retire_;
  std::vector<UniqueSampleTable> tables_;
  std::size_t records_ = 0;
  std::vector<double> slot_mass_;
};

/// Batch form of EssAccumulator without retirement.
[[nodiscard]] std::vector<double> ess_per_step(std::span<const IterationRecord> records);

/// Weighted histogram with `bins` equal bins on [lo, hi); mass outside is dropped.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mass;

  /// Normalizes to a density that integrates to one over [lo, hi).
  [[nodiscard]] std::vector<double> density() const;
};

[[nodiscard]] Histogram weighted_histogram(std::span<const double> values, std::span<const double> weights,
                                           double lo, double hi, std::size_t bins);

/// Marginal histogram of component `d` at step t built the same way as the ESS weights.
class HistogramAccumulator {
 public:
  HistogramAccumulator(std::size_t step, std::size_t component, double lo, double hi, std::size_t bins);

  void add(const IterationRecord& record);
  [[nodiscard]] const Histogram& histogram() const noexcept { return histogram_; }

 private:
  std::size_t step_;
  std::size_t component_;
  Histogram histogram_;
};

/// Running mean of a vector-valued per-iteration estimate.
class RunningMean {
 public:
  explicit RunningMean(std::size_t dim) : sum_(dim, 0.0) {}

  void add(std::span<const double> value);
  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] std::vector<double> mean() const;

 private:
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

/// Mean over all entries of (estimate - truth)^2.
[[nodiscard]] double mean_squared_error(std::span<const double> estimate, std::span<const double> truth);

/// Per-step MSE averaged over the D components of each step; inputs are [t][d].
[[nodiscard]] std::vector<double> mse_per_step(std::span<const double> estimate, std::span<const double> truth,
                                               std::size_t dim);

}  // namespace ipmcmc

#endif  // IPMCMC_ESTIMATORS_HPP
