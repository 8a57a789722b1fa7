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

#include "ipmcmc/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ipmcmc/errors.hpp"

namespace ipmcmc::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t power_block(const MetricsOptions& options) { return options.horizon * options.dim; }

}  // namespace

MetricsAccumulator::MetricsAccumulator(MetricsOptions options)
    : options_(std::move(options)),
      output_dim_(power_block(options_) * static_cast<std::size_t>(options_.max_power)),
      rb_(output_dim_),
      mc_(output_dim_) {
  if (options_.horizon == 0 || options_.dim == 0 || options_.max_power < 1) {
    throw DimensionMismatch("metrics need a positive horizon, dimension and power");
  }
  if (options_.truth && (options_.truth->horizon != options_.horizon || options_.truth->dim != options_.dim ||
                         options_.truth->max_power < options_.max_power)) {
    throw DimensionMismatch("ground truth does not match the metric shape");
  }
  if (options_.ess) {
    ess_.emplace(options_.horizon, options_.dim, options_.retire);
  }
  for (const auto step : options_.histogram_steps) {
    if (step >= options_.horizon) {
      throw DimensionMismatch("histogram step outside the horizon");
    }
    histograms_.push_back(weighted_histogram({}, {}, options_.histogram_lo, options_.histogram_hi,
                                             options_.histogram_bins));
  }
}

void MetricsAccumulator::begin_record(std::size_t iteration, std::size_t stage, bool initialization,
                                      std::span<const std::size_t> conditional, std::span<const double> zeta,
                                      std::size_t nodes, std::span<const std::int8_t> accepted) {
  iteration_ = iteration;
  stage_ = stage;
  initialization_ = initialization;
  slots_ = conditional.size();
  nodes_ = nodes;
  zeta_.assign(zeta.begin(), zeta.end());
  shares_ = node_weights(zeta_, slots_, nodes_, 1);
  expectations_.assign(nodes_ * output_dim_, 0.0);
  nodes_added_ = 0;

  const std::vector<std::size_t> current(conditional.begin(), conditional.end());
  if (!initialization && stage == 0) {
    ++transitions_;
    if (!previous_conditional_.empty() && previous_conditional_ != current) {
      ++switches_;
    }
  }
  previous_conditional_ = current;
  for (const auto a : accepted) {
    if (a >= 0) {
      ++mh_tests_;
      mh_accepts_ += static_cast<std::size_t>(a);
    }
  }
}

void MetricsAccumulator::add_node(std::size_t node, std::span<const double> expectation) {
  if (node >= nodes_ || expectation.size() != output_dim_) {
    throw DimensionMismatch("node expectation does not match the record");
  }
  std::copy(expectation.begin(), expectation.end(),
            expectations_.begin() + static_cast<std::ptrdiff_t>(node * output_dim_));
  ++nodes_added_;
}

void MetricsAccumulator::add_retained(std::span<const double> path) {
  if (initialization_) {
    return;
  }
  const std::size_t block = power_block(options_);
  if (path.size() != block) {
    throw DimensionMismatch("retained path does not match the metric shape");
  }
  std::vector<double> value(output_dim_);
  for (std::size_t e = 0; e < block; ++e) {
    double power = path[e];
    for (int k = 0; k < options_.max_power; ++k) {
      value[static_cast<std::size_t>(k) * block + e] = power;
      power *= path[e];
    }
  }
  mc_.add(value);
}

void MetricsAccumulator::add_particle_mass(std::size_t node, std::size_t t, std::span<const double> value,
                                           double mass) {
  if (initialization_) {
    return;
  }
  const double weight = shares_.at(node) * mass;
  if (!(weight > 0.0)) {
    return;
  }
  if (ess_) {
    ess_->add_entry(t, value, weight);
  }
  for (std::size_t h = 0; h < histograms_.size(); ++h) {
    if (options_.histogram_steps[h] != t) {
      continue;
    }
    auto& histogram = histograms_[h];
    const double x = value[0];
    if (x >= histogram.lo && x < histogram.hi) {
      const auto bins = histogram.mass.size();
      const auto b = static_cast<std::size_t>((x - histogram.lo) / (histogram.hi - histogram.lo) *
                                              static_cast<double>(bins));
      histogram.mass[std::min(b, bins - 1)] += weight;
    }
  }
}

void MetricsAccumulator::end_record() {
  if (initialization_) {
    return;
  }
  if (nodes_added_ != nodes_) {
    throw DimensionMismatch("record is missing node expectations");
  }
  rb_.add(rao_blackwellized_combine(expectations_, output_dim_, zeta_, slots_));
  if (ess_) {
    ess_->end_record();
  }
  RecordMetrics row{iteration_, stage_, kNaN, kNaN};
  if (options_.truth) {
    const std::size_t block = power_block(options_);
    const auto truth = options_.truth->means();
    row.mse_rb = mean_squared_error(std::span<const double>(rb_.mean()).first(block), truth);
    if (mc_.count() > 0) {
      row.mse_mc = mean_squared_error(std::span<const double>(mc_.mean()).first(block), truth);
    }
  }
  per_record_.push_back(row);
}

std::vector<double> MetricsAccumulator::ess() const {
  if (!ess_) {
    return std::vector<double>(options_.horizon, kNaN);
  }
  return ess_->ess();
}

double MetricsAccumulator::switch_rate() const {
  return transitions_ == 0 ? 0.0 : static_cast<double>(switches_) / static_cast<double>(transitions_);
}

double MetricsAccumulator::acceptance_rate() const {
  return mh_tests_ == 0 ? kNaN : static_cast<double>(mh_accepts_) / static_cast<double>(mh_tests_);
}

std::vector<double> MetricsAccumulator::mse_per_step_rb() const {
  if (!options_.truth) {
    return std::vector<double>(options_.horizon, kNaN);
  }
  const auto block = power_block(options_);
  return mse_per_step(std::span<const double>(rb_.mean()).first(block), options_.truth->means(), options_.dim);
}

std::vector<double> MetricsAccumulator::mse_per_step_mc() const {
  if (!options_.truth || mc_.count() == 0) {
    return std::vector<double>(options_.horizon, kNaN);
  }
  const auto block = power_block(options_);
  return mse_per_step(std::span<const double>(mc_.mean()).first(block), options_.truth->means(), options_.dim);
}

RunRecorder::RunRecorder(const std::filesystem::path& directory, const std::string& manifest_hash,
                         MetricsOptions options, Files files)
    : directory_(directory),
      hash_(manifest_hash),
      files_(files),
      metrics_(options),
      f_(TestFunction::marginal_powers(options.horizon, options.dim, options.max_power)) {}

void RunRecorder::open_writers(std::size_t nodes, std::size_t state_dim) {
  if (!files_.records) {
    return;
  }
  const std::size_t values = metrics_.options().horizon * state_dim;
  std::vector<std::string> header{"iteration", "stage", "init", "node", "log_z", "slot", "b", "accepted"};
  for (std::size_t k = 0; k < values; ++k) {
    header.push_back(fmt::format("x{}", k));
  }
  records_ = std::make_unique<CsvWriter>(directory_ / "records.csv", hash_, header);

  header = {"iteration", "stage", "slot"};
  for (std::size_t m = 0; m < nodes; ++m) {
    header.push_back(fmt::format("zeta{}", m));
  }
  zeta_ = std::make_unique<CsvWriter>(directory_ / "zeta.csv", hash_, header);

  header = {"iteration", "stage", "node"};
  for (std::size_t k = 0; k < metrics_.output_dim(); ++k) {
    header.push_back(fmt::format("e{}", k));
  }
  moments_ = std::make_unique<CsvWriter>(directory_ / "node_moments.csv", hash_, header);

  if (files_.particles) {
    header = {"iteration", "stage", "node", "t", "slot", "mass"};
    for (std::size_t d = 0; d < state_dim; ++d) {
      header.push_back(fmt::format("x{}", d));
    }
    particles_ = std::make_unique<CsvWriter>(directory_ / "particles.csv", hash_, header);
  }
}

void RunRecorder::on_iteration(const IterationRecord& record) {
  const std::size_t nodes = record.nodes();
  if (nodes == 0) {
    return;
  }
  const std::size_t state_dim = record.sweeps[0]->state_dim();
  if (files_.records && !records_) {
    open_writers(nodes, state_dim);
  }
  const auto r = static_cast<std::uint64_t>(record.iteration);
  const auto stage = static_cast<std::uint64_t>(record.stage);

  metrics_.begin_record(record.iteration, record.stage, record.initialization, record.conditional, record.zeta,
                        nodes, record.accepted);

  for (std::size_t m = 0; m < nodes; ++m) {
    const auto e = node_expectation(*record.sweeps[m], f_);
    metrics_.add_node(m, e);
    if (moments_) {
      moments_->add(r);
      moments_->add(stage);
      moments_->add(static_cast<std::uint64_t>(m));
      for (const double v : e) {
        moments_->add(v);
      }
      moments_->end_row();
    }
  }

  std::vector<std::int64_t> slot_of(nodes, -1);
  for (std::size_t j = 0; j < record.slots(); ++j) {
    slot_of[record.conditional[j]] = static_cast<std::int64_t>(j);
  }
  const std::size_t values = metrics_.options().horizon * state_dim;
  for (std::size_t m = 0; m < nodes; ++m) {
    const auto slot = slot_of[m];
    if (slot >= 0) {
      metrics_.add_retained(record.retained[static_cast<std::size_t>(slot)].values());
    }
    if (records_) {
      records_->add(r);
      records_->add(stage);
      records_->add(static_cast<std::uint64_t>(record.initialization ? 1 : 0));
      records_->add(static_cast<std::uint64_t>(m));
      records_->add(record.sweeps[m]->log_evidence());
      records_->add(slot);
      records_->add(slot >= 0 ? static_cast<std::int64_t>(record.retained_index[static_cast<std::size_t>(slot)])
                              : std::int64_t{-1});
      records_->add(static_cast<std::int64_t>(record.accepted.empty() ? -1 : record.accepted[m]));
      if (slot >= 0) {
        for (const double x : record.retained[static_cast<std::size_t>(slot)].values()) {
          records_->add(x);
        }
      } else {
        for (std::size_t k = 0; k < values; ++k) {
          records_->add(std::string_view());
        }
      }
      records_->end_row();
    }
  }

  if (zeta_) {
    for (std::size_t j = 0; j < record.slots(); ++j) {
      zeta_->add(r);
      zeta_->add(stage);
      zeta_->add(static_cast<std::uint64_t>(j));
      for (std::size_t m = 0; m < nodes; ++m) {
        zeta_->add(record.zeta[j * nodes + m]);
      }
      zeta_->end_row();
    }
  }

  const bool need_mass = particles_ || (!record.initialization && (metrics_.options().ess ||
                                                                   !metrics_.options().histogram_steps.empty()));
  if (need_mass) {
    for (std::size_t m = 0; m < nodes; ++m) {
      const auto& sweep = *record.sweeps[m];
      const auto mass = final_slot_mass(sweep);
      const std::size_t n = sweep.particle_count();
      for (std::size_t t = 0; t < sweep.horizon(); ++t) {
        for (std::size_t s = 0; s < n; ++s) {
          const double w = mass[t * n + s];
          if (w == 0.0) {
            continue;
          }
          const auto x = sweep.state(t, s);
          metrics_.add_particle_mass(m, t, x, w);
          if (particles_) {
            particles_->add(r);
            particles_->add(stage);
            particles_->add(static_cast<std::uint64_t>(m));
            particles_->add(static_cast<std::uint64_t>(t));
            particles_->add(static_cast<std::uint64_t>(s));
            particles_->add(w);
            for (const double v : x) {
              particles_->add(v);
            }
            particles_->end_row();
          }
        }
      }
    }
  }
  metrics_.end_record();
}

void RunRecorder::on_finish(const ChainSummary& summary) {
  summary_ = summary;
  for (auto* writer : {records_.get(), zeta_.get(), moments_.get(), particles_.get()}) {
    if (writer != nullptr) {
      writer->flush();
    }
  }
}

void RunRecorder::on_abort(std::string_view /*reason*/) {
  for (auto* writer : {records_.get(), zeta_.get(), moments_.get(), particles_.get()}) {
    if (writer != nullptr) {
      writer->flush();
    }
  }
}

void write_metrics(const std::filesystem::path& directory, const std::string& manifest_hash,
                   const MetricsAccumulator& metrics) {
  const auto& options = metrics.options();
  {
    CsvWriter out(directory / "metrics_per_record.csv", manifest_hash, {"iteration", "stage", "mse_rb", "mse_mc"});
    for (const auto& row : metrics.per_record()) {
      out.add(static_cast<std::uint64_t>(row.iteration));
      out.add(static_cast<std::uint64_t>(row.stage));
      out.add(row.mse_rb);
      out.add(row.mse_mc);
      out.end_row();
    }
  }
  const auto samples = static_cast<double>(metrics.samples());
  const auto ess = metrics.ess();
  const auto mse_rb = metrics.mse_per_step_rb();
  const auto mse_mc = metrics.mse_per_step_mc();
  {
    CsvWriter out(directory / "metrics_per_step.csv", manifest_hash, {"t", "mse_rb", "mse_mc", "ess", "ness"});
    for (std::size_t t = 0; t < options.horizon; ++t) {
      out.add(static_cast<std::uint64_t>(t));
      out.add(mse_rb[t]);
      out.add(mse_mc[t]);
      out.add(ess[t]);
      out.add(ess[t] / samples);
      out.end_row();
    }
  }
  {
    const auto rb = metrics.rb_estimate();
    const auto mc = metrics.mc_estimate();
    CsvWriter out(directory / "estimates.csv", manifest_hash, {"power", "t", "d", "rb", "mc", "truth"});
    const std::size_t block = options.horizon * options.dim;
    for (int k = 1; k <= options.max_power; ++k) {
      for (std::size_t t = 0; t < options.horizon; ++t) {
        for (std::size_t d = 0; d < options.dim; ++d) {
          const std::size_t e = static_cast<std::size_t>(k - 1) * block + t * options.dim + d;
          out.add(k);
          out.add(static_cast<std::uint64_t>(t));
          out.add(static_cast<std::uint64_t>(d));
          out.add(rb[e]);
          out.add(mc[e]);
          out.add(options.truth ? options.truth->moments[e] : kNaN);
          out.end_row();
        }
      }
    }
  }
  if (!options.histogram_steps.empty()) {
    CsvWriter out(directory / "histograms.csv", manifest_hash, {"t", "bin_lo", "bin_hi", "density"});
    for (std::size_t h = 0; h < options.histogram_steps.size(); ++h) {
      const auto& histogram = metrics.histograms()[h];
      const auto density = histogram.density();
      const double width = (histogram.hi - histogram.lo) / static_cast<double>(density.size());
      for (std::size_t b = 0; b < density.size(); ++b) {
        out.add(static_cast<std::uint64_t>(options.histogram_steps[h]));
        out.add(histogram.lo + width * static_cast<double>(b));
        out.add(histogram.lo + width * static_cast<double>(b + 1));
        out.add(density[b]);
        out.end_row();
      }
    }
  }
  {
    CsvWriter out(directory / "summary.csv", manifest_hash, {"key", "value"});
    auto row = [&out](std::string_view key, double value) {
      out.add(key);
      out.add(value);
      out.end_row();
    };
    row("samples", samples);
    row("switch_rate", metrics.switch_rate());
    row("acceptance_rate", metrics.acceptance_rate());
    const auto& per_record = metrics.per_record();
    row("final_mse_rb", per_record.empty() ? kNaN : per_record.back().mse_rb);
    row("final_mse_mc", per_record.empty() ? kNaN : per_record.back().mse_mc);
    if (!per_record.empty()) {
      row("final_mse", options.rao_blackwell ? per_record.back().mse_rb : per_record.back().mse_mc);
    }
    double ess_total = 0.0;
    for (const double e : ess) {
      ess_total += e;
    }
    row("mean_ess", ess_total / static_cast<double>(options.horizon));
  }
}

namespace {

// One-row lookahead over a CsvReader.
class PeekReader {
 public:
  explicit PeekReader(const std::filesystem::path& path) : reader_(path) { advance(); }

  [[nodiscard]] bool has_row() const noexcept { return has_row_; }
  [[nodiscard]] const std::vector<std::string>& row() const noexcept { return row_; }
  [[nodiscard]] bool at(std::uint64_t iteration, std::uint64_t stage) const {
    return has_row_ && parse_unsigned(row_[0]) == iteration && parse_unsigned(row_[1]) == stage;
  }
  void advance() { has_row_ = reader_.next(row_); }

 private:
  CsvReader reader_;
  std::vector<std::string> row_;
  bool has_row_ = false;
};

std::vector<double> parse_doubles(const std::vector<std::string>& row, std::size_t first) {
  std::vector<double> out;
  out.reserve(row.size() - first);
  for (std::size_t k = first; k < row.size(); ++k) {
    out.push_back(parse_double(row[k]));
  }
  return out;
}

}  // namespace

void replay_records(const std::filesystem::path& directory, MetricsAccumulator& metrics) {
  PeekReader records(directory / "records.csv");
  PeekReader zeta(directory / "zeta.csv");
  PeekReader moments(directory / "node_moments.csv");
  std::optional<PeekReader> particles;
  if (std::filesystem::exists(directory / "particles.csv")) {
    particles.emplace(directory / "particles.csv");
  }

  while (records.has_row()) {
    const auto iteration = parse_unsigned(records.row()[0]);
    const auto stage = parse_unsigned(records.row()[1]);
    const bool initialization = parse_unsigned(records.row()[2]) != 0;

    std::vector<std::vector<std::string>> rows;
    while (records.at(iteration, stage)) {
      rows.push_back(records.row());
      records.advance();
    }
    const std::size_t nodes = rows.size();
    std::vector<std::size_t> conditional;
    std::vector<std::int8_t> accepted(nodes, -1);
    for (std::size_t m = 0; m < nodes; ++m) {
      const auto slot = parse_signed(rows[m][5]);
      if (slot >= 0) {
        if (conditional.size() <= static_cast<std::size_t>(slot)) {
          conditional.resize(static_cast<std::size_t>(slot) + 1);
        }
        conditional[static_cast<std::size_t>(slot)] = m;
      }
      accepted[m] = static_cast<std::int8_t>(parse_signed(rows[m][7]));
    }
    std::vector<double> zeta_values;
    while (zeta.at(iteration, stage)) {
      const auto row = parse_doubles(zeta.row(), 3);
      zeta_values.insert(zeta_values.end(), row.begin(), row.end());
      zeta.advance();
    }
    metrics.begin_record(iteration, stage, initialization, conditional, zeta_values, nodes, accepted);
    while (moments.at(iteration, stage)) {
      const auto node = parse_unsigned(moments.row()[2]);
      metrics.add_node(node, parse_doubles(moments.row(), 3));
      moments.advance();
    }
    for (std::size_t m = 0; m < nodes; ++m) {
      if (parse_signed(rows[m][5]) >= 0) {
        metrics.add_retained(parse_doubles(rows[m], 8));
      }
    }
    if (particles) {
      while (particles->at(iteration, stage)) {
        const auto& row = particles->row();
        metrics.add_particle_mass(parse_unsigned(row[2]), parse_unsigned(row[3]), parse_doubles(row, 6),
                                  parse_double(row[5]));
        particles->advance();
      }
    }
    metrics.end_record();
  }
}

}  // namespace ipmcmc::harness
