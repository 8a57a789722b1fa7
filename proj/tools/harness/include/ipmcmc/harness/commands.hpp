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

#ifndef IPMCMC_HARNESS_COMMANDS_HPP
#define IPMCMC_HARNESS_COMMANDS_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipmcmc/harness/config.hpp"
#include "ipmcmc/harness/dataset.hpp"
#include "ipmcmc/harness/metrics.hpp"

namespace ipmcmc::harness {

struct RunResult {
  std::filesystem::path directory;
  std::string manifest_hash;
  ChainSummary summary;
};

/// Metric settings for a run; attaches the exact oracle when the model has one.
[[nodiscard]] MetricsOptions metrics_options(const ExperimentConfig& config, const ModelBundle& bundle,
                                             const Dataset& dataset);

/// Runs one experiment into config.output.directory.
/**
 * Writes manifest.txt, dataset.csv, the record files, the metric tables and
 * status.txt. status.txt reads "incomplete: <reason>" until the run finishes; on an
 * exception it keeps the reason and the exception propagates.
 */
RunResult cmd_run(const ExperimentConfig& config);

struct SweepCell {
  std::size_t nodes = 0;
  std::size_t conditional = 0;
  std::size_t dataset = 0;
  std::filesystem::path directory;
  bool ok = false;
  double final_mse = 0.0;
  std::string error;
};

struct SweepRow {
  std::size_t nodes = 0;
  std::size_t conditional = 0;
  std::size_t datasets = 0;  // cells that finished, with a finished P = M cell
  double median = 0.0;       // of the error normalized by the P = M cell
  double lower_quartile = 0.0;
  double upper_quartile = 0.0;
  double median_mse = 0.0;
};

struct SweepTable {
  std::vector<SweepCell> cells;
  std::vector<SweepRow> rows;
};

/// Grid mode: runs every (nodes, conditional, dataset) cell into its own directory,
/// skipping cells already marked complete, then writes sweep.csv. P = M cells are
/// added when missing since they normalize the others. Switching mode writes
/// switching.csv. A failing cell is reported and the remaining cells still run.
SweepTable cmd_sweep(const ExperimentConfig& config);

/// Writes truth.csv (linear Gaussian and HMM) or reference_histograms.csv (nonlinear).
void cmd_oracle(const ExperimentConfig& config);

/// Recomputes the metric tables of a finished run from its record files. Writes into
/// `output` when set, otherwise back into `run_directory`.
void cmd_metrics(const std::filesystem::path& run_directory,
                 const std::optional<std::filesystem::path>& output = std::nullopt);

/// Linear-interpolation quantile of unsorted values, q in [0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double q);

}  // namespace ipmcmc::harness

#endif  // IPMCMC_HARNESS_COMMANDS_HPP
