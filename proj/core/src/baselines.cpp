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

#include "ipmcmc/baselines.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/smc.hpp"
#include "parallel.hpp"

namespace ipmcmc {

namespace {

constexpr std::array<std::pair<SamplerKind, std::string_view>, 7> kNames{{
    {SamplerKind::ipmcmc, "ipmcmc"},
    {SamplerKind::mpg, "mpg"},
    {SamplerKind::mpimh, "mpimh"},
    {SamplerKind::mapg, "mapg"},
    {SamplerKind::smc, "smc"},
    {SamplerKind::pg, "pg"},
    {SamplerKind::pimh, "pimh"},
}};

PimhState fresh_state(const StateSpaceModel& model, const Observations& observations, std::size_t particle_count,
                      RandomStream& rng) {
  auto sweep = std::make_shared<const SweepResult>(smc_sweep(model, observations, particle_count, rng));
  auto selection = select_retained(*sweep, rng);
  return {std::move(selection.trajectory), sweep->log_evidence(), selection.index, sweep};
}

void validate_multi_start(SamplerKind kind, const PoolConfig& config) {
  if (config.nodes < 1) {
    throw InvalidConfig("sampler.nodes", "must be at least 1");
  }
  if ((kind == SamplerKind::pg || kind == SamplerKind::pimh) && config.nodes != 1) {
    throw InvalidConfig("sampler.nodes", "single-chain samplers need exactly one node");
  }
  if (config.particles < 2) {
    throw InvalidConfig("sampler.particles", "must be at least 2");
  }
  if (config.iterations < 1) {
    throw InvalidConfig("sampler.iterations", "must be at least 1");
  }
  if (config.workers < 1) {
    throw InvalidConfig("sampler.workers", "must be at least 1");
  }
}

// Flat per-chain arrays that back the records handed to sinks.
struct ChainTable {
  explicit ChainTable(std::size_t chains)
      : sweeps(chains), conditional(chains), retained_index(chains), retained(chains),
        zeta(chains * chains, 0.0), accepted(chains, -1) {
    std::iota(conditional.begin(), conditional.end(), std::size_t{0});
    for (std::size_t m = 0; m < chains; ++m) {
      zeta[m * chains + m] = 1.0;
    }
  }

  void store(std::size_t m, const PimhState& state) {
    sweeps[m] = state.sweep;
    retained_index[m] = state.index;
    retained[m] = state.trajectory;
  }

  [[nodiscard]] IterationRecord record(std::size_t iteration, bool initialization, std::size_t stage,
                                       bool with_accept) const {
    IterationRecord out;
    out.iteration = iteration;
    out.initialization = initialization;
    out.stage = stage;
    out.sweeps = sweeps;
    out.conditional = conditional;
    out.retained_index = retained_index;
    out.retained = retained;
    out.zeta = zeta;
    if (with_accept) {
      out.accepted = accepted;
    }
    return out;
  }

  std::vector<std::shared_ptr<const SweepResult>> sweeps;
  std::vector<std::size_t> conditional;
  std::vector<std::size_t> retained_index;
  std::vector<Trajectory> retained;
  std::vector<double> zeta;
  std::vector<std::int8_t> accepted;
};

}  // namespace

std::string_view to_string(SamplerKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) {
      return name;
    }
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) {
      return k;
    }
  }
  throw InvalidConfig("sampler.kind", "unknown sampler '" + std::string(name) + "'");
}

PgResult pg_step(const Trajectory& retained, const StateSpaceModel& model, const Observations& observations,
                 std::size_t particle_count, RandomStream& rng) {
  auto sweep = std::make_shared<const SweepResult>(csmc_sweep(model, observations, particle_count, retained, rng));
  auto selection = select_retained(*sweep, rng);
  return {std::move(selection), std::move(sweep)};
}

bool metropolis_accept(double log_ratio, RandomStream& rng) {
  const double u = rng.uniform();
  if (std::isnan(log_ratio)) {
    throw InvalidWeight("acceptance ratio is NaN");
  }
  return log_ratio >= 0.0 || u < std::exp(log_ratio);
}

PimhResult pimh_step(const PimhState& current, const StateSpaceModel& model, const Observations& observations,
                     std::size_t particle_count, RandomStream& rng) {
  if (!std::isfinite(current.log_evidence)) {
    throw InvalidWeight("current evidence estimate is not finite");
  }
  auto proposal = fresh_state(model, observations, particle_count, rng);
  if (metropolis_accept(proposal.log_evidence - current.log_evidence, rng)) {
    return {std::move(proposal), true};
  }
  return {current, false};
}

ApgResult apg_step(const PimhState& state, const StateSpaceModel& model, const Observations& observations,
                   std::size_t particle_count, RandomStream& rng, const ApgOptions& options) {
  ApgResult out;
  if (options.run_pg) {
    auto pg_rng = rng.derive("pg");
    auto pg = pg_step(state.trajectory, model, observations, particle_count, pg_rng);
    out.after_pg = {std::move(pg.selection.trajectory), pg.sweep->log_evidence(), pg.selection.index,
                    std::move(pg.sweep)};
  } else {
    out.after_pg = state;
  }
  if (options.run_pimh) {
    auto pimh_rng = rng.derive("pimh");
    auto pimh = pimh_step(out.after_pg, model, observations, particle_count, pimh_rng);
    if (options.force_reject) {
      pimh = {out.after_pg, false};
    }
    out.after_pimh = std::move(pimh.state);
    out.accepted = pimh.accepted;
  } else {
    out.after_pimh = out.after_pg;
  }
  return out;
}

ChainSummary run_multi_start(SamplerKind kind, const PoolConfig& config, const StateSpaceModel& model,
                             const Observations& observations, std::span<ChainSink* const> sinks,
                             const ApgOptions& apg) {
  if (kind == SamplerKind::ipmcmc) {
    throw InvalidConfig("sampler.kind", "ipmcmc is not a multi-start sampler");
  }
  validate_multi_start(kind, config);
  const auto started = std::chrono::steady_clock::now();
  const std::size_t chains = config.nodes;
  const std::size_t n = config.particles;
  const RandomStream root(config.seed);
  const bool metropolis = kind == SamplerKind::mpimh || kind == SamplerKind::pimh || kind == SamplerKind::mapg;

  ChainSummary summary;
  ChainTable table(chains);
  std::vector<PimhState> states(chains);
  std::vector<PimhState> halfway(chains);
  auto emit = [&](std::size_t iteration, bool initialization, std::size_t stage, bool with_accept) {
    const auto record = table.record(iteration, initialization, stage, with_accept);
    for (auto* sink : sinks) {
      sink->on_iteration(record);
    }
    ++summary.records;
  };

  try {
    detail::for_each_index(chains, config.workers, [&](std::size_t m) {
      auto rng = node_stream(root, m, 0);
      states[m] = fresh_state(model, observations, n, rng);
    });
    for (std::size_t m = 0; m < chains; ++m) {
      table.store(m, states[m]);
    }
    emit(0, true, 0, false);

    for (std::size_t r = 1; r <= config.iterations; ++r) {
      detail::for_each_index(chains, config.workers, [&](std::size_t m) {
        auto rng = node_stream(root, m, r);
        switch (kind) {
          case SamplerKind::mpg:
          case SamplerKind::pg: {
            auto pg = pg_step(states[m].trajectory, model, observations, n, rng);
            states[m] = {std::move(pg.selection.trajectory), pg.sweep->log_evidence(), pg.selection.index,
                         std::move(pg.sweep)};
            break;
          }
          case SamplerKind::mpimh:
          case SamplerKind::pimh: {
            auto step = pimh_step(states[m], model, observations, n, rng);
            states[m] = std::move(step.state);
            table.accepted[m] = step.accepted ? 1 : 0;
            break;
          }
          case SamplerKind::mapg: {
            auto step = apg_step(states[m], model, observations, n, rng, apg);
            halfway[m] = std::move(step.after_pg);
            states[m] = std::move(step.after_pimh);
            table.accepted[m] = step.accepted.has_value() ? (*step.accepted ? 1 : 0) : -1;
            break;
          }
          case SamplerKind::smc:
            states[m] = fresh_state(model, observations, n, rng);
            break;
          case SamplerKind::ipmcmc:
            break;
        }
      });
      ++summary.iterations;
      if (kind == SamplerKind::mapg) {
        for (std::size_t m = 0; m < chains; ++m) {
          table.store(m, halfway[m]);
        }
        emit(r, false, 0, false);
      }
      for (std::size_t m = 0; m < chains; ++m) {
        table.store(m, states[m]);
        if (metropolis && table.accepted[m] >= 0) {
          ++summary.mh_tests;
          summary.mh_accepts += static_cast<std::size_t>(table.accepted[m]);
        }
      }
      emit(r, false, kind == SamplerKind::mapg ? 1 : 0, metropolis);
    }
  } catch (const std::exception& error) {
    for (auto* sink : sinks) {
      sink->on_abort(error.what());
    }
    throw;
  }
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  for (auto* sink : sinks) {
    sink->on_finish(summary);
  }
  return summary;
}

ChainSummary run_sampler(SamplerKind kind, const PoolConfig& config, const StateSpaceModel& model,
                         const Observations& observations, std::span<ChainSink* const> sinks) {
  if (kind == SamplerKind::ipmcmc) {
    return run_chain(config, model, observations, sinks);
  }
  return run_multi_start(kind, config, model, observations, sinks);
}

}  // namespace ipmcmc
