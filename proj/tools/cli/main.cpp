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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/harness/commands.hpp"
#include "ipmcmc/harness/config.hpp"
#include "ipmcmc/version.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeAbort = 3;

ipmcmc::harness::ExperimentConfig load(const std::string& path) {
  auto config = ipmcmc::harness::load_config(path);
  ipmcmc::harness::apply_environment(config);
  ipmcmc::harness::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting particle MCMC experiment runner"};
  app.set_version_flag("--version", IPMCMC_VERSION_STRING);
  app.require_subcommand(1);

  std::string config_path;
  std::string run_directory;
  std::string output_directory;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config_path, "Experiment config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments or tabulate switching rates");
  sweep->add_option("config", config_path, "Experiment config file")->required();
  auto* oracle = app.add_subcommand("oracle", "Write ground truth for the configured dataset");
  oracle->add_option("config", config_path, "Experiment config file")->required();
  auto* metrics = app.add_subcommand("metrics", "Recompute metric tables from a run's record files");
  metrics->add_option("run_dir", run_directory, "Directory written by `run`")->required();
  metrics->add_option("-o,--output", output_directory, "Write tables here instead of run_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      const auto result = ipmcmc::harness::cmd_run(load(config_path));
      fmt::print("{} manifest={} iterations={} seconds={:.3f}\n", result.directory.string(), result.manifest_hash,
                 result.summary.iterations, result.summary.seconds);
    } else if (*sweep) {
      const auto table = ipmcmc::harness::cmd_sweep(load(config_path));
      std::size_t failed = 0;
      for (const auto& cell : table.cells) {
        failed += cell.ok ? 0 : 1;
      }
      fmt::print("{} cells, {} failed\n", table.cells.size(), failed);
      return failed == 0 ? 0 : kRuntimeAbort;
    } else if (*oracle) {
      ipmcmc::harness::cmd_oracle(load(config_path));
    } else if (*metrics) {
      std::optional<std::filesystem::path> output;
      if (!output_directory.empty()) {
        output = output_directory;
      }
      ipmcmc::harness::cmd_metrics(run_directory, output);
    }
  } catch (const ipmcmc::InvalidConfig& error) {
    fmt::print(stderr, "config error: {}\n", error.what());
    return kConfigError;
  } catch (const std::exception& error) {
    fmt::print(stderr, "aborted: {}\n", error.what());
    return kRuntimeAbort;
  }
  return 0;
}
