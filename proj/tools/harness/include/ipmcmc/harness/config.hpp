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

#ifndef IPMCMC_HARNESS_CONFIG_HPP
#define IPMCMC_HARNESS_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipmcmc/baselines.hpp"
#include "ipmcmc/engine.hpp"

namespace ipmcmc::harness {

enum class ModelKind { lgssm, lgssm_scalar, nlssm, hmm };

[[nodiscard]] std::string_view to_string(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::lgssm;
  std::size_t horizon = 50;
  std::uint64_t data_seed = 1;
  std::size_t dataset = 0;
  /// Optional dataset file; its header overrides kind, seed and index.
  std::filesystem::path dataset_path;
};

struct OutputConfig {
  std::filesystem::path directory = "ipmcmc-out";
  bool records = true;
  bool particles = false;
  bool ess = true;
  bool rao_blackwell = true;
  int max_power = 1;
  /// Steps (0-based) at which weighted marginal histograms are written.
  std::vector<std::size_t> histogram_steps;
  double histogram_lo = -25.0;
  double histogram_hi = 25.0;
  std::size_t histogram_bins = 100;
};

struct SweepConfig {
  /// "grid" runs samplers over nodes x conditional x datasets; "switching" tabulates
  /// the log-normal switching probability over nodes x sigmas.
  std::string mode = "grid";
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> conditional;
  std::size_t datasets = 5;
  std::vector<double> sigmas;
  std::size_t trials = 100000;
};

struct OracleConfig {
  std::size_t particles = 100000;
  std::size_t sweeps = 4;
  std::vector<std::size_t> steps{0, 99, 199};
  std::size_t bins = 100;
  double lo = -25.0;
  double hi = 25.0;
};

struct ExperimentConfig {
  ModelConfig model;
  SamplerKind sampler = SamplerKind::ipmcmc;
  PoolConfig pool;
  OutputConfig output;
  SweepConfig sweep;
  OracleConfig oracle;
};

/// Parses INI text with [model], [sampler], [output], [sweep] and [oracle] sections.
/// Unknown keys and malformed values raise InvalidConfig with the dotted key path.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// IPMCMC_OUTPUT_DIR and IPMCMC_WORKERS override the output directory and worker count.
void apply_environment(ExperimentConfig& config);

void validate(const ExperimentConfig& config);

/// INI text of every setting that affects a run; parse_config() reads it back. Worker
/// count and output location are left out, so the text and its hash do not depend on them.
[[nodiscard]] std::string canonical_text(const ExperimentConfig& config);

}  // namespace ipmcmc::harness

#endif  // IPMCMC_HARNESS_CONFIG_HPP
