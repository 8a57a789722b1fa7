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

#include "ipmcmc/harness/config.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ipmcmc/errors.hpp"

namespace ipmcmc::harness {

namespace {

namespace pt = boost::property_tree;

constexpr std::array<std::pair<ModelKind, std::string_view>, 4> kModelNames{{
    {ModelKind::lgssm, "lgssm"},
    {ModelKind::lgssm_scalar, "lgssm1d"},
    {ModelKind::nlssm, "nlssm"},
    {ModelKind::hmm, "hmm"},
}};

const std::set<std::string> kKnownKeys{
    "model.kind",          "model.horizon",       "model.data_seed",      "model.dataset",
    "model.dataset_path",  "sampler.kind",        "sampler.nodes",        "sampler.conditional",
    "sampler.particles",   "sampler.iterations",  "sampler.seed",         "sampler.workers",
    "output.directory",    "output.records",      "output.particles",     "output.ess",
    "output.rao_blackwell", "output.max_power",   "output.histogram_steps", "output.histogram_lo",
    "output.histogram_hi", "output.histogram_bins", "sweep.mode",         "sweep.nodes",
    "sweep.conditional",   "sweep.datasets",      "sweep.sigmas",         "sweep.trials",
    "oracle.particles",    "oracle.sweeps",       "oracle.steps",         "oracle.bins",
    "oracle.lo",           "oracle.hi",
};

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t");
  if (begin == std::string_view::npos) {
    return {};
  }
  const auto end = text.find_last_not_of(" \t");
  return std::string(text.substr(begin, end - begin + 1));
}

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
  T value{};
  const auto clean = trim(text);
  const auto* first = clean.data();
  const auto* last = clean.data() + clean.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    value = std::strtod(clean.c_str(), &end);
    if (clean.empty() || end != last) {
      throw InvalidConfig(field, "expected a number, got '" + text + "'");
    }
  } else {
    if (!clean.empty() && clean.front() == '-') {
      throw InvalidConfig(field, "must not be negative");
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw InvalidConfig(field, "expected a non-negative integer, got '" + text + "'");
    }
  }
  return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const auto clean = trim(text);
  if (clean == "true" || clean == "1" || clean == "yes" || clean == "on") {
    return true;
  }
  if (clean == "false" || clean == "0" || clean == "no" || clean == "off") {
    return false;
  }
  throw InvalidConfig(field, "expected true or false, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& field, const std::string& text) {
  std::vector<T> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!trim(item).empty()) {
      out.push_back(parse_number<T>(field, item));
    }
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  [[nodiscard]] std::optional<std::string> raw(const std::string& key) const {
    if (auto value = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) {
      return *value;
    }
    return std::nullopt;
  }

  template <typename T>
  void number(const std::string& key, T& target) const {
    if (auto value = raw(key)) {
      target = parse_number<T>(key, *value);
    }
  }

  void flag(const std::string& key, bool& target) const {
    if (auto value = raw(key)) {
      target = parse_bool(key, *value);
    }
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& target) const {
    if (auto value = raw(key)) {
      target = parse_list<T>(key, *value);
    }
  }

 private:
  const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw InvalidConfig(section, "keys must live inside a section");
    }
    for (const auto& [key, value] : body) {
      const auto path = section + "." + key;
      if (kKnownKeys.count(path) == 0) {
        throw InvalidConfig(path, "unknown key");
      }
    }
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kModelNames) {
    if (k == kind) {
      return name;
    }
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kModelNames) {
    if (n == trim(name)) {
      return k;
    }
  }
  throw InvalidConfig("model.kind", "unknown model '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& error) {
    throw InvalidConfig("config", fmt::format("line {}: {}", error.line(), error.message()));
  }
  check_keys(tree);
  const Reader read(tree);
  ExperimentConfig config;

  if (auto kind = read.raw("model.kind")) {
    config.model.kind = parse_model_kind(*kind);
  }
  read.number("model.horizon", config.model.horizon);
  read.number("model.data_seed", config.model.data_seed);
  read.number("model.dataset", config.model.dataset);
  if (auto path = read.raw("model.dataset_path")) {
    config.model.dataset_path = trim(*path);
  }

  if (auto kind = read.raw("sampler.kind")) {
    config.sampler = parse_sampler_kind(trim(*kind));
  }
  const bool single = config.sampler == SamplerKind::pg || config.sampler == SamplerKind::pimh;
  if (single) {
    config.pool.nodes = 1;
  }
  read.number("sampler.nodes", config.pool.nodes);
  if (config.sampler == SamplerKind::ipmcmc) {
    config.pool.conditional = config.pool.nodes / 2 > 0 ? config.pool.nodes / 2 : 1;
    read.number("sampler.conditional", config.pool.conditional);
  } else {
    if (read.raw("sampler.conditional")) {
      throw InvalidConfig("sampler.conditional", "only valid for the ipmcmc sampler");
    }
    config.pool.conditional = config.pool.nodes;
  }
  read.number("sampler.particles", config.pool.particles);
  read.number("sampler.iterations", config.pool.iterations);
  read.number("sampler.seed", config.pool.seed);
  read.number("sampler.workers", config.pool.workers);

  if (auto dir = read.raw("output.directory")) {
    config.output.directory = trim(*dir);
  }
  read.flag("output.records", config.output.records);
  read.flag("output.particles", config.output.particles);
  read.flag("output.ess", config.output.ess);
  read.flag("output.rao_blackwell", config.output.rao_blackwell);
  if (auto power = read.raw("output.max_power")) {
    config.output.max_power = static_cast<int>(parse_number<unsigned>("output.max_power", *power));
  }
  read.list("output.histogram_steps", config.output.histogram_steps);
  read.number("output.histogram_lo", config.output.histogram_lo);
  read.number("output.histogram_hi", config.output.histogram_hi);
  read.number("output.histogram_bins", config.output.histogram_bins);

  if (auto mode = read.raw("sweep.mode")) {
    config.sweep.mode = trim(*mode);
  }
  read.list("sweep.nodes", config.sweep.nodes);
  read.list("sweep.conditional", config.sweep.conditional);
  read.number("sweep.datasets", config.sweep.datasets);
  read.list("sweep.sigmas", config.sweep.sigmas);
  read.number("sweep.trials", config.sweep.trials);

  read.number("oracle.particles", config.oracle.particles);
  read.number("oracle.sweeps", config.oracle.sweeps);
  read.list("oracle.steps", config.oracle.steps);
  read.number("oracle.bins", config.oracle.bins);
  read.number("oracle.lo", config.oracle.lo);
  read.number("oracle.hi", config.oracle.hi);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidConfig("config", "cannot open " + path.string());
  }
  return parse_config(in);
}

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv("IPMCMC_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    config.output.directory = dir;
  }
  if (const char* workers = std::getenv("IPMCMC_WORKERS"); workers != nullptr && *workers != '\0') {
    config.pool.workers = parse_number<std::size_t>("IPMCMC_WORKERS", workers);
  }
}

void validate(const ExperimentConfig& config) {
  if (config.model.horizon < 1) {
    throw InvalidConfig("model.horizon", "must be at least 1");
  }
  if (config.sampler == SamplerKind::ipmcmc) {
    config.pool.validate();
  } else {
    if (config.pool.nodes < 1) {
      throw InvalidConfig("sampler.nodes", "must be at least 1");
    }
    if ((config.sampler == SamplerKind::pg || config.sampler == SamplerKind::pimh) && config.pool.nodes != 1) {
      throw InvalidConfig("sampler.nodes", "single-chain samplers need exactly one node");
    }
    PoolConfig pool = config.pool;
    pool.conditional = pool.nodes;
    pool.validate();
  }
  if (config.output.max_power < 1 || config.output.max_power > 4) {
    throw InvalidConfig("output.max_power", "must lie in [1, 4]");
  }
  for (const auto t : config.output.histogram_steps) {
    if (t >= config.model.horizon) {
      throw InvalidConfig("output.histogram_steps", "step outside [0, horizon)");
    }
  }
  if (config.output.histogram_bins < 1 || !(config.output.histogram_hi > config.output.histogram_lo)) {
    throw InvalidConfig("output.histogram_bins", "need at least one bin and histogram_hi > histogram_lo");
  }
  if (config.sweep.mode != "grid" && config.sweep.mode != "switching") {
    throw InvalidConfig("sweep.mode", "must be grid or switching");
  }
  if (config.sweep.datasets < 1) {
    throw InvalidConfig("sweep.datasets", "must be at least 1");
  }
  for (const double sigma : config.sweep.sigmas) {
    if (!(sigma > 0.0)) {
      throw InvalidConfig("sweep.sigmas", "must be positive");
    }
  }
  if (config.oracle.particles < 1 || config.oracle.sweeps < 1 || config.oracle.bins < 1 ||
      !(config.oracle.hi > config.oracle.lo)) {
    throw InvalidConfig("oracle", "particles, sweeps and bins must be positive and hi > lo");
  }
}

std::string canonical_text(const ExperimentConfig& config) {
  std::string out;
  auto section = [&out](std::string_view name) { out += fmt::format("[{}]\n", name); };
  auto line = [&out](std::string_view key, const auto& value) { out += fmt::format("{}={}\n", key, value); };
  section("model");
  line("kind", to_string(config.model.kind));
  line("horizon", config.model.horizon);
  line("data_seed", config.model.data_seed);
  line("dataset", config.model.dataset);
  if (!config.model.dataset_path.empty()) {
    line("dataset_path", config.model.dataset_path.string());
  }
  section("sampler");
  line("kind", to_string(config.sampler));
  line("nodes", config.pool.nodes);
  if (config.sampler == SamplerKind::ipmcmc) {
    line("conditional", config.pool.conditional);
  }
  line("particles", config.pool.particles);
  line("iterations", config.pool.iterations);
  line("seed", config.pool.seed);
  section("output");
  line("records", config.output.records);
  line("particles", config.output.particles);
  line("ess", config.output.ess);
  line("rao_blackwell", config.output.rao_blackwell);
  line("max_power", config.output.max_power);
  line("histogram_steps", fmt::format("{}", fmt::join(config.output.histogram_steps, ",")));
  line("histogram_lo", config.output.histogram_lo);
  line("histogram_hi", config.output.histogram_hi);
  line("histogram_bins", config.output.histogram_bins);
  return out;
}

}  // namespace ipmcmc::harness
