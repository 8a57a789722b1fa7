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

#include "ipmcmc/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ipmcmc/baselines.hpp"
#include "ipmcmc/errors.hpp"
#include "ipmcmc/harness/csv.hpp"
#include "ipmcmc/harness/oracle.hpp"
#include "ipmcmc/switching.hpp"
#include "ipmcmc/version.hpp"

namespace ipmcmc::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_text(const std::filesystem::path& path, const std::string& hash, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << "# manifest=" << hash << '\n' << body;
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

void set_status(const std::filesystem::path& directory, const std::string& hash, const std::string& status) {
  write_text(directory / "status.txt", hash, status + "\n");
}

bool run_complete(const std::filesystem::path& directory, const std::string& hash) {
  std::ifstream in(directory / "status.txt");
  std::string first;
  std::string second;
  return std::getline(in, first) && std::getline(in, second) && first == "# manifest=" + hash &&
         second == "complete";
}

double summary_value(const std::filesystem::path& directory, std::string_view key) {
  CsvReader reader(directory / "summary.csv");
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() == 2 && row[0] == key) {
      return parse_double(row[1]);
    }
  }
  return kNaN;
}

ExperimentConfig read_manifest(const std::filesystem::path& path, std::string& hash) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    if (line.rfind("# manifest=", 0) == 0) {
      hash = line.substr(11);
    } else if (!line.empty() && line.front() != '#') {
      body += line + '\n';
    }
  }
  std::istringstream stream(body);
  return parse_config(stream);
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    return kNaN;
  }
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const auto upper = std::min(lower + 1, values.size() - 1);
  const double frac = position - static_cast<double>(lower);
  return values[lower] + frac * (values[upper] - values[lower]);
}

MetricsOptions metrics_options(const ExperimentConfig& config, const ModelBundle& bundle, const Dataset& dataset) {
  MetricsOptions options;
  options.horizon = dataset.observations.horizon();
  options.dim = bundle.model->state_dim();
  options.max_power = config.output.max_power;
  options.ess = config.output.ess;
  // Discrete states revisit the same values across records, so entries must persist.
  options.retire = bundle.kind != ModelKind::hmm;
  if (bundle.kind != ModelKind::nlssm) {
    options.truth = ground_truth(bundle, dataset, config.output.max_power);
  }
  options.histogram_steps = config.output.histogram_steps;
  options.histogram_lo = config.output.histogram_lo;
  options.histogram_hi = config.output.histogram_hi;
  options.histogram_bins = config.output.histogram_bins;
  options.rao_blackwell = config.output.rao_blackwell;
  return options;
}

RunResult cmd_run(const ExperimentConfig& config) {
  validate(config);
  const auto directory = config.output.directory;
  std::filesystem::create_directories(directory);
  const auto text = canonical_text(config);
  const auto hash = content_hash(text);
  write_text(directory / "manifest.txt", hash, fmt::format("# version={}\n{}", IPMCMC_VERSION_STRING, text));
  set_status(directory, hash, "incomplete: running");

  try {
    const auto dataset = resolve_dataset(config.model);
    const auto bundle = make_model(dataset.kind, dataset.data_seed, dataset.index);
    write_dataset(directory / "dataset.csv", dataset, bundle, hash);

    RunRecorder recorder(directory, hash, metrics_options(config, bundle, dataset),
                         {config.output.records, config.output.particles});
    ChainSink* sinks[] = {&recorder};
    const auto summary = run_sampler(config.sampler, config.pool, *bundle.model, dataset.observations, sinks);
    write_metrics(directory, hash, recorder.metrics());
    write_text(directory / "run_info.txt", hash,
               fmt::format("seconds={}\niterations={}\nrecords={}\nscalars_exchanged={}\ntrajectories_exchanged={}\n",
                           summary.seconds, summary.iterations, summary.records, summary.scalars_exchanged,
                           summary.trajectories_exchanged));
    set_status(directory, hash, "complete");
    return {directory, hash, summary};
  } catch (const std::exception& error) {
    set_status(directory, hash, std::string("incomplete: ") + error.what());
    throw;
  }
}

SweepTable cmd_sweep(const ExperimentConfig& config) {
  validate(config);
  const auto directory = config.output.directory;
  std::filesystem::create_directories(directory);
  SweepTable table;

  if (config.sweep.mode == "switching") {
    const auto hash = content_hash(canonical_text(config) + fmt::format("[sweep]\nmode=switching\ntrials={}\n",
                                                                        config.sweep.trials));
    CsvWriter out(directory / "switching.csv", hash,
                  {"nodes", "conditional", "sigma", "probability", "standard_error", "trials", "equal_weights"});
    const RandomStream root(config.pool.seed);
    for (const auto m : config.sweep.nodes) {
      // An empty conditional list means every P in [1, M].
      std::vector<std::size_t> ps = config.sweep.conditional;
      if (ps.empty()) {
        ps.resize(m);
        std::iota(ps.begin(), ps.end(), std::size_t{1});
      }
      for (const auto p : ps) {
        if (p < 1 || p > m) {
          continue;
        }
        for (const double sigma : config.sweep.sigmas) {
          const auto estimate = switch_probability_lognormal_mc(
              LogNormalLimit{sigma}, m, p, config.sweep.trials,
              root.derive("switching", m).derive("conditional", p), config.pool.workers);
          out.add(static_cast<std::uint64_t>(m));
          out.add(static_cast<std::uint64_t>(p));
          out.add(sigma);
          out.add(estimate.probability);
          out.add(estimate.standard_error);
          out.add(static_cast<std::uint64_t>(estimate.trials));
          out.add(switch_probability_equal_weights(m, p));
          out.end_row();
        }
      }
    }
    return table;
  }

  if (config.sampler != SamplerKind::ipmcmc) {
    throw InvalidConfig("sweep.mode", "grid mode sweeps the ipmcmc sampler");
  }
  for (const auto m : config.sweep.nodes) {
    std::vector<std::size_t> ps;
    for (const auto p : config.sweep.conditional) {
      if (p >= 1 && p <= m) {
        ps.push_back(p);
      }
    }
    if (std::find(ps.begin(), ps.end(), m) == ps.end()) {
      ps.push_back(m);
    }
    for (const auto p : ps) {
      for (std::size_t d = 0; d < config.sweep.datasets; ++d) {
        SweepCell cell;
        cell.nodes = m;
        cell.conditional = p;
        cell.dataset = d;
        cell.directory = directory / fmt::format("cell_M{}_P{}_d{}", m, p, d);
        ExperimentConfig cell_config = config;
        cell_config.pool.nodes = m;
        cell_config.pool.conditional = p;
        cell_config.model.dataset = d;
        cell_config.output.directory = cell.directory;
        try {
          const auto hash = content_hash(canonical_text(cell_config));
          if (!run_complete(cell.directory, hash)) {
            (void)cmd_run(cell_config);
          }
          cell.final_mse = summary_value(cell.directory, "final_mse");
          cell.ok = true;
        } catch (const std::exception& error) {
          cell.error = error.what();
          fmt::print(stderr, "cell {}: {}\n", cell.directory.string(), cell.error);
        }
        table.cells.push_back(std::move(cell));
      }
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<const SweepCell*>> groups;
  std::map<std::pair<std::size_t, std::size_t>, const SweepCell*> reference;
  for (const auto& cell : table.cells) {
    groups[{cell.nodes, cell.conditional}].push_back(&cell);
    if (cell.ok && cell.nodes == cell.conditional) {
      reference[{cell.nodes, cell.dataset}] = &cell;
    }
  }
  const auto hash = content_hash(canonical_text(config) + "[sweep]\nmode=grid\n");
  CsvWriter out(directory / "sweep.csv", hash,
                {"nodes", "conditional", "datasets", "median", "lower_quartile", "upper_quartile", "median_mse"});
  for (const auto& [key, cells] : groups) {
    std::vector<double> normalized;
    std::vector<double> raw;
    for (const auto* cell : cells) {
      const auto ref = reference.find({cell->nodes, cell->dataset});
      if (!cell->ok || ref == reference.end()) {
        continue;
      }
      raw.push_back(cell->final_mse);
      normalized.push_back(cell->final_mse / ref->second->final_mse);
    }
    SweepRow row{key.first,
                 key.second,
                 normalized.size(),
                 quantile(normalized, 0.5),
                 quantile(normalized, 0.25),
                 quantile(normalized, 0.75),
                 quantile(raw, 0.5)};
    out.add(static_cast<std::uint64_t>(row.nodes));
    out.add(static_cast<std::uint64_t>(row.conditional));
    out.add(static_cast<std::uint64_t>(row.datasets));
    out.add(row.median);
    out.add(row.lower_quartile);
    out.add(row.upper_quartile);
    out.add(row.median_mse);
    out.end_row();
    table.rows.push_back(row);
  }
  return table;
}

void cmd_oracle(const ExperimentConfig& config) {
  validate(config);
  const auto directory = config.output.directory;
  std::filesystem::create_directories(directory);
  const auto dataset = resolve_dataset(config.model);
  const auto bundle = make_model(dataset.kind, dataset.data_seed, dataset.index);
  const auto text =
      canonical_text(config) + fmt::format("[oracle]\nparticles={}\nsweeps={}\nsteps={}\nbins={}\nlo={}\nhi={}\n",
                                           config.oracle.particles, config.oracle.sweeps,
                                           fmt::join(config.oracle.steps, ","), config.oracle.bins,
                                           config.oracle.lo, config.oracle.hi);
  const auto hash = content_hash(text);
  write_text(directory / "manifest.txt", hash, fmt::format("# version={}\n{}", IPMCMC_VERSION_STRING, text));
  write_dataset(directory / "dataset.csv", dataset, bundle, hash);

  if (bundle.kind == ModelKind::nlssm) {
    const auto references = smc_reference_histograms(bundle, dataset, config.oracle, config.pool.seed);
    CsvWriter out(directory / "reference_histograms.csv", hash, {"t", "bin_lo", "bin_hi", "density"});
    for (const auto& reference : references) {
      const auto density = reference.histogram.density();
      const double width =
          (reference.histogram.hi - reference.histogram.lo) / static_cast<double>(density.size());
      for (std::size_t b = 0; b < density.size(); ++b) {
        out.add(static_cast<std::uint64_t>(reference.step));
        out.add(reference.histogram.lo + width * static_cast<double>(b));
        out.add(reference.histogram.lo + width * static_cast<double>(b + 1));
        out.add(density[b]);
        out.end_row();
      }
    }
    return;
  }

  const auto truth = ground_truth(bundle, dataset, config.output.max_power);
  std::vector<std::string> header{"t", "d", "variance"};
  for (int k = 1; k <= truth.max_power; ++k) {
    header.push_back(fmt::format("m{}", k));
  }
  CsvWriter out(directory / "truth.csv", hash, header, {fmt::format("log_evidence={}", format_double(truth.log_evidence))});
  const std::size_t block = truth.horizon * truth.dim;
  for (std::size_t t = 0; t < truth.horizon; ++t) {
    for (std::size_t d = 0; d < truth.dim; ++d) {
      const std::size_t e = t * truth.dim + d;
      out.add(static_cast<std::uint64_t>(t));
      out.add(static_cast<std::uint64_t>(d));
      out.add(truth.variances[e]);
      for (int k = 0; k < truth.max_power; ++k) {
        out.add(truth.moments[static_cast<std::size_t>(k) * block + e]);
      }
      out.end_row();
    }
  }
}

void cmd_metrics(const std::filesystem::path& run_directory, const std::optional<std::filesystem::path>& output) {
  std::string hash;
  auto config = read_manifest(run_directory / "manifest.txt", hash);
  if (content_hash(canonical_text(config)) != hash) {
    throw InvalidConfig("manifest", "hash does not match the recorded settings");
  }
  if (!config.output.records) {
    throw InvalidConfig("output.records", "run was made without record files");
  }
  const auto dataset = read_dataset(run_directory / "dataset.csv");
  const auto bundle = make_model(dataset.kind, dataset.data_seed, dataset.index);
  auto options = metrics_options(config, bundle, dataset);
  if (!config.output.particles) {
    // Without the particle file only the retained-path and node-level metrics survive.
    options.ess = false;
    options.histogram_steps.clear();
  }
  MetricsAccumulator metrics(options);
  replay_records(run_directory, metrics);
  const auto target = output.value_or(run_directory);
  std::filesystem::create_directories(target);
  write_metrics(target, hash, metrics);
}

}  // namespace ipmcmc::harness
