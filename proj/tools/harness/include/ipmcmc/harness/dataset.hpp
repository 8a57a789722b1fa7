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

#ifndef IPMCMC_HARNESS_DATASET_HPP
#define IPMCMC_HARNESS_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ipmcmc/harness/config.hpp"
#include "ipmcmc/model.hpp"
#include "ipmcmc/models/discrete_hmm.hpp"
#include "ipmcmc/models/lgssm.hpp"
#include "ipmcmc/models/nlssm.hpp"

namespace ipmcmc::harness {

/// A model instance together with the parameters needed by its oracle.
struct ModelBundle {
  ModelKind kind = ModelKind::lgssm;
  std::unique_ptr<StateSpaceModel> model;
  std::optional<models::LgssmParams> lgssm;
  std::optional<models::NlssmParams> nlssm;
  std::optional<models::DiscreteHmm> hmm;
};

/// Parameters of dataset `index` drawn from the labelled substream (data_seed, index).
[[nodiscard]] ModelBundle make_model(ModelKind kind, std::uint64_t data_seed, std::size_t index);

struct Dataset {
  ModelKind kind = ModelKind::lgssm;
  std::uint64_t data_seed = 0;
  std::size_t index = 0;
  Trajectory latents;
  Observations observations;
};

/// Simulates dataset `index` of length `horizon`. Bit-reproducible for fixed inputs.
[[nodiscard]] Dataset simulate_dataset(ModelKind kind, std::uint64_t data_seed, std::size_t index,
                                       std::size_t horizon);

/// Loads the configured dataset file, or simulates one when no path is set.
[[nodiscard]] Dataset resolve_dataset(const ModelConfig& config);

/// Self-describing columnar text: `# key=value` header lines (kind, seed, index,
/// horizon, dimensions, parameters) then `t,x0..,y0..` rows.
void write_dataset(const std::filesystem::path& path, const Dataset& dataset, const ModelBundle& bundle,
                   const std::string& manifest_hash);
[[nodiscard]] Dataset read_dataset(const std::filesystem::path& path);

}  // namespace ipmcmc::harness

#endif  // IPMCMC_HARNESS_DATASET_HPP
