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

#ifndef IPMCMC_HARNESS_METRICS_HPP
#define IPMCMC_HARNESS_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipmcmc/engine.hpp"
#include "ipmcmc/estimators.hpp"
#include "ipmcmc/harness/csv.hpp"
#include "ipmcmc/harness/oracle.hpp"

namespace ipmcmc::harness {

struct MetricsOptions {
  std::size_t horizon = 0;
  std::size_t dim = 0;
  int max_power = 1;
  bool ess = true;
  /// Retire ESS entries between records; only valid for continuous states.
  bool retire = true;
  std::optional<GroundTruth> truth;
  std::vector<std::size_t> histogram_steps;
  double histogram_lo = -25.0;
  double histogram_hi = 25.0;
  std::size_t histogram_bins = 100;
  /// Selects the estimator reported as final_mse in summary.csv.
  bool rao_blackwell = true;
};

struct RecordMetrics {
  std::size_t iteration = 0;
  std::size_t stage = 0;
  double mse_rb = 0.0;  // NaN without ground truth
  double mse_mc = 0.0;
};

/// Turns a stream of records into estimates and diagnostics.
/**
 * Fed either live from a running chain or from files written by RunRecorder; both
 * paths call the same methods in the same order, so their outputs agree exactly.
 * Per record: begin_record(), then one add_node() per node in node order, one
 * add_retained() per conditional node in node order, add_particle_mass() entries in
 * (node, t, slot) order, and end_record().
 */
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(MetricsOptions options);

  void begin_record(std::size_t iteration, std::size_t stage, bool initialization,
                    std::span<const std::size_t> conditional, std::span<const double> zeta, std::size_t nodes,
                    std::span<const std::int8_t> accepted);
  void add_node(std::size_t node, std::span<const double> expectation);
  void add_retained(std::span<const double> path);
  void add_particle_mass(std::size_t node, std::size_t t, std::span<const double> value, double mass);
  void end_record();

  [[nodiscard]] const MetricsOptions& options() const noexcept { return options_; }
  [[nodiscard]] std::size_t output_dim() const noexcept { return output_dim_; }
  [[nodiscard]] const std::vector<RecordMetrics>& per_record() const noexcept { return per_record_; }
  /// Number of non-initialization records consumed.
  [[nodiscard]] std::size_t samples() const noexcept { return rb_.count(); }
  [[nodiscard]] std::vector<double> rb_estimate() const { return rb_.mean(); }
  [[nodiscard]] std::vector<double> mc_estimate() const { return mc_.mean(); }
  [[nodiscard]] std::vector<double> ess() const;
  [[nodiscard]] const std::vector<Histogram>& histograms() const noexcept { return histograms_; }
  [[nodiscard]] double switch_rate() const;
  [[nodiscard]] double acceptance_rate() const;
  /// Final per-step MSE of the mean block, averaged over components.
  [[nodiscard]] std::vector<double> mse_per_step_rb() const;
  [[nodiscard]] std::vector<double> mse_per_step_mc() const;

 private:
  MetricsOptions options_;
  std::size_t output_dim_;
  RunningMean rb_;
  RunningMean mc_;
  std::optional<EssAccumulator> ess_;
  std::vector<Histogram> histograms_;
  std::vector<RecordMetrics> per_record_;

  // Current record.
  bool initialization_ = false;
  std::size_t iteration_ = 0;
  std::size_t stage_ = 0;
  std::size_t slots_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> zeta_;
  std::vector<double> shares_;
  std::vector<double> expectations_;
  std::size_t nodes_added_ = 0;

  std::vector<std::size_t> previous_conditional_;
  std::size_t transitions_ = 0;
  std::size_t switches_ = 0;
  std::size_t mh_tests_ = 0;
  std::size_t mh_accepts_ = 0;
};

/// Streams records to disk and into a MetricsAccumulator.
class RunRecorder final : public ChainSink {
 public:
  struct Files {
    bool records = true;
    bool particles = false;
  };

  RunRecorder(const std::filesystem::path& directory, const std::string& manifest_hash, MetricsOptions options,
              Files files);

  void on_iteration(const IterationRecord& record) override;
  void on_finish(const ChainSummary& summary) override;
  void on_abort(std::string_view reason) override;

  [[nodiscard]] const MetricsAccumulator& metrics() const noexcept { return metrics_; }
  [[nodiscard]] const std::optional<ChainSummary>& summary() const noexcept { return summary_; }

 private:
  void open_writers(std::size_t nodes, std::size_t state_dim);

  std::filesystem::path directory_;
  std::string hash_;
  Files files_;
  MetricsAccumulator metrics_;
  TestFunction f_;
  std::unique_ptr<CsvWriter> records_;
  std::unique_ptr<CsvWriter> zeta_;
  std::unique_ptr<CsvWriter> moments_;
  std::unique_ptr<CsvWriter> particles_;
  std::optional<ChainSummary> summary_;
};

/// Writes metrics_per_record.csv, metrics_per_step.csv, histograms.csv and summary.csv.
void write_metrics(const std::filesystem::path& directory, const std::string& manifest_hash,
                   const MetricsAccumulator& metrics);

/// Rebuilds the accumulator from records.csv, zeta.csv, node_moments.csv and, when
/// present, particles.csv in `directory`.
void replay_records(const std::filesystem::path& directory, MetricsAccumulator& metrics);

}  // namespace ipmcmc::harness

#endif  // IPMCMC_HARNESS_METRICS_HPP
