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

#include "ipmcmc/harness/dataset.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/harness/csv.hpp"

namespace ipmcmc::harness {

namespace {

RandomStream dataset_stream(std::uint64_t data_seed, std::size_t index) {
  return RandomStream(data_seed).derive("dataset", index);
}

std::string join_matrix(const Eigen::MatrixXd& m) {
  std::vector<std::string> values;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      values.push_back(format_double(m(r, c)));
    }
  }
  return fmt::format("{}", fmt::join(values, ";"));
}

std::string join_values(const std::vector<double>& v) {
  std::vector<std::string> values;
  for (const double x : v) {
    values.push_back(format_double(x));
  }
  return fmt::format("{}", fmt::join(values, ";"));
}

std::vector<std::string> parameter_lines(const ModelBundle& bundle) {
  std::vector<std::string> lines;
  if (bundle.lgssm) {
    const auto& p = *bundle.lgssm;
    lines.push_back("param.initial_mean=" + join_matrix(p.initial_mean));
    lines.push_back("param.initial_cov=" + join_matrix(p.initial_cov));
    lines.push_back("param.transition=" + join_matrix(p.transition));
    lines.push_back("param.transition_cov=" + join_matrix(p.transition_cov));
    lines.push_back("param.emission=" + join_matrix(p.emission));
    lines.push_back("param.emission_cov=" + join_matrix(p.emission_cov));
  }
  if (bundle.nlssm) {
    const auto& p = *bundle.nlssm;
    lines.push_back("param.initial_mean=" + format_double(p.initial_mean));
    lines.push_back("param.initial_sd=" + format_double(p.initial_sd));
    lines.push_back("param.transition_sd=" + format_double(p.transition_sd));
    lines.push_back("param.observation_sd=" + format_double(p.observation_sd));
  }
  if (bundle.hmm) {
    const auto& h = *bundle.hmm;
    lines.push_back(fmt::format("param.state_count={}", h.state_count));
    lines.push_back(fmt::format("param.symbol_count={}", h.symbol_count));
    lines.push_back("param.initial=" + join_values(h.initial));
    lines.push_back("param.transition=" + join_values(h.transition));
    lines.push_back("param.emission=" + join_values(h.emission));
  }
  return lines;
}

}  // namespace

ModelBundle make_model(ModelKind kind, std::uint64_t data_seed, std::size_t index) {
  ModelBundle bundle;
  bundle.kind = kind;
  switch (kind) {
    case ModelKind::lgssm:
      bundle.lgssm = models::benchmark_lgssm_params(dataset_stream(data_seed, index).derive("params").key());
      bundle.model = std::make_unique<models::LinearGaussianModel>(*bundle.lgssm);
      break;
    case ModelKind::lgssm_scalar:
      bundle.lgssm = models::scalar_lgssm_params(0.0, 1.0, 0.9, 0.5, 1.0, 1.0);
      bundle.model = std::make_unique<models::LinearGaussianModel>(*bundle.lgssm);
      break;
    case ModelKind::nlssm:
      bundle.nlssm = models::NlssmParams{};
      bundle.model = std::make_unique<models::NonlinearModel>(*bundle.nlssm);
      break;
    case ModelKind::hmm:
      bundle.hmm = models::two_state_hmm();
      bundle.model = std::make_unique<models::DiscreteHmmModel>(*bundle.hmm);
      break;
  }
  return bundle;
}

Dataset simulate_dataset(ModelKind kind, std::uint64_t data_seed, std::size_t index, std::size_t horizon) {
  const auto bundle = make_model(kind, data_seed, index);
  auto rng = dataset_stream(data_seed, index).derive("simulate");
  Dataset dataset;
  dataset.kind = kind;
  dataset.data_seed = data_seed;
  dataset.index = index;
  switch (kind) {
    case ModelKind::lgssm:
    case ModelKind::lgssm_scalar: {
      auto sample = models::lgssm_simulate(*bundle.lgssm, horizon, rng);
      dataset.latents = std::move(sample.latents);
      dataset.observations = std::move(sample.observations);
      break;
    }
    case ModelKind::nlssm: {
      auto sample = models::nlssm_simulate(*bundle.nlssm, horizon, rng);
      dataset.latents = std::move(sample.latents);
      dataset.observations = std::move(sample.observations);
      break;
    }
    case ModelKind::hmm: {
      auto sample = models::hmm_simulate(*bundle.hmm, horizon, rng);
      dataset.latents = std::move(sample.latents);
      dataset.observations = std::move(sample.observations);
      break;
    }
  }
  return dataset;
}

Dataset resolve_dataset(const ModelConfig& config) {
  if (!config.dataset_path.empty()) {
    return read_dataset(config.dataset_path);
  }
  return simulate_dataset(config.kind, config.data_seed, config.dataset, config.horizon);
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset, const ModelBundle& bundle,
                   const std::string& manifest_hash) {
  const std::size_t dx = dataset.latents.dim();
  const std::size_t dy = dataset.observations.dim();
  std::vector<std::string> comments{
      fmt::format("kind={}", to_string(dataset.kind)),
      fmt::format("data_seed={}", dataset.data_seed),
      fmt::format("index={}", dataset.index),
      fmt::format("horizon={}", dataset.observations.horizon()),
      fmt::format("state_dim={}", dx),
      fmt::format("observation_dim={}", dy),
  };
  for (auto& line : parameter_lines(bundle)) {
    comments.push_back(std::move(line));
  }
  std::vector<std::string> header{"t"};
  for (std::size_t d = 0; d < dx; ++d) {
    header.push_back(fmt::format("x{}", d));
  }
  for (std::size_t d = 0; d < dy; ++d) {
    header.push_back(fmt::format("y{}", d));
  }
  CsvWriter out(path, manifest_hash, header, comments);
  for (std::size_t t = 0; t < dataset.observations.horizon(); ++t) {
    out.add(static_cast<std::uint64_t>(t));
    for (const double x : dataset.latents.at(t)) {
      out.add(x);
    }
    for (const double y : dataset.observations.at(t)) {
      out.add(y);
    }
    out.end_row();
  }
}

Dataset read_dataset(const std::filesystem::path& path) {
  CsvReader in(path);
  auto required = [&](std::string_view key) {
    auto value = in.comment_value(key);
    if (value.empty()) {
      throw InvalidConfig("model.dataset_path", path.string() + " lacks the '" + std::string(key) + "' header");
    }
    return value;
  };
  Dataset dataset;
  dataset.kind = parse_model_kind(required("kind"));
  dataset.data_seed = parse_unsigned(required("data_seed"));
  dataset.index = parse_unsigned(required("index"));
  const auto horizon = parse_unsigned(required("horizon"));
  const auto dx = parse_unsigned(required("state_dim"));
  const auto dy = parse_unsigned(required("observation_dim"));
  if (in.header().size() != 1 + dx + dy) {
    throw InvalidConfig("model.dataset_path", "column count does not match the declared dimensions");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<std::string> fields;
  std::size_t rows = 0;
  while (in.next(fields)) {
    if (fields.size() != 1 + dx + dy || parse_unsigned(fields[0]) != rows) {
      throw InvalidConfig("model.dataset_path", "malformed row " + std::to_string(rows));
    }
    for (std::size_t d = 0; d < dx; ++d) {
      xs.push_back(parse_double(fields[1 + d]));
    }
    for (std::size_t d = 0; d < dy; ++d) {
      ys.push_back(parse_double(fields[1 + dx + d]));
    }
    ++rows;
  }
  if (rows != horizon) {
    throw InvalidConfig("model.dataset_path", "row count does not match the declared horizon");
  }
  dataset.latents = Trajectory(horizon, dx, std::move(xs));
  dataset.observations = Observations(horizon, dy, std::move(ys));
  return dataset;
}

}  // namespace ipmcmc::harness
