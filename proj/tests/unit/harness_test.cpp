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

#include <chrono>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ipmcmc/errors.hpp"
#include "ipmcmc/harness/commands.hpp"
#include "ipmcmc/harness/config.hpp"
#include "ipmcmc/harness/csv.hpp"
#include "ipmcmc/harness/dataset.hpp"

namespace ipmcmc::harness {
namespace {

namespace fs = std::filesystem;

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("ipmcmc_harness_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  [[nodiscard]] ExperimentConfig parse(const std::string& text) const {
    std::istringstream in(text);
    auto config = parse_config(in);
    validate(config);
    return config;
  }

  [[nodiscard]] ExperimentConfig small_lgssm(const std::string& dir) const {
    auto config = parse(
        "[model]\nkind=lgssm\nhorizon=6\n"
        "[sampler]\nkind=ipmcmc\nnodes=4\nconditional=2\nparticles=20\niterations=15\nseed=5\n"
        "[output]\nparticles=true\nmax_power=2\nhistogram_steps=0,5\n");
    config.output.directory = root_ / dir;
    return config;
  }

  fs::path root_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string field_of(const std::function<void()>& action) {
  try {
    action();
  } catch (const InvalidConfig& error) {
    return error.field();
  }
  return "<none>";
}

TEST_F(HarnessTest, ConfigErrorsNameTheField) {
  EXPECT_EQ(field_of([&] { (void)parse("[sampler]\nnodes=4\nconditional=5\n"); }), "sampler.conditional");
  EXPECT_EQ(field_of([&] { (void)parse("[sampler]\nparticles=1\n"); }), "sampler.particles");
  EXPECT_EQ(field_of([&] { (void)parse("[sampler]\nparticles=-3\n"); }), "sampler.particles");
  EXPECT_EQ(field_of([&] { (void)parse("[sampler]\nbogus=1\n"); }), "sampler.bogus");
  EXPECT_EQ(field_of([&] { (void)parse("[model]\nkind=nope\n"); }), "model.kind");
  EXPECT_EQ(field_of([&] { (void)parse("[sampler]\nkind=mpg\nconditional=2\n"); }), "sampler.conditional");
  EXPECT_EQ(field_of([&] { (void)parse("[output]\nmax_power=7\n"); }), "output.max_power");
}

TEST_F(HarnessTest, ShippedConfigsValidate) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(IPMCMC_CONFIG_DIR)) {
    if (entry.path().extension() == ".ini") {
      EXPECT_NO_THROW(validate(load_config(entry.path()))) << entry.path();
      ++count;
    }
  }
  EXPECT_GE(count, 1U);
}

TEST_F(HarnessTest, CanonicalTextRoundTrips) {
  const auto config = small_lgssm("a");
  const auto text = canonical_text(config);
  std::istringstream in(text);
  EXPECT_EQ(canonical_text(parse_config(in)), text);
  auto other = config;
  other.pool.workers = 7;
  EXPECT_EQ(canonical_text(other), text);
  other.pool.seed = 6;
  EXPECT_NE(canonical_text(other), text);
}

TEST_F(HarnessTest, CsvRoundTrip) {
  const auto path = root_ / "t.csv";
  {
    CsvWriter out(path, "abc", {"x", "name"}, {"note=1"});
    out.add(0.1);
    out.add(std::string_view("first"));
    out.end_row();
    out.add(-1e-300);
    out.add(std::string_view(""));
    out.end_row();
  }
  CsvReader in(path);
  EXPECT_EQ(in.comment_value("manifest"), "abc");
  EXPECT_EQ(in.comment_value("note"), "1");
  EXPECT_EQ(in.column("name"), 1U);
  std::vector<std::string> row;
  ASSERT_TRUE(in.next(row));
  EXPECT_EQ(parse_double(row[0]), 0.1);
  EXPECT_EQ(row[1], "first");
  ASSERT_TRUE(in.next(row));
  EXPECT_EQ(parse_double(row[0]), -1e-300);
  EXPECT_EQ(row[1], "");
  EXPECT_FALSE(in.next(row));
}

TEST_F(HarnessTest, DatasetRoundTrip) {
  const auto bundle = make_model(ModelKind::nlssm, 3, 1);
  const auto data = simulate_dataset(ModelKind::nlssm, 3, 1, 12);
  write_dataset(root_ / "d.csv", data, bundle, "h");
  const auto back = read_dataset(root_ / "d.csv");
  EXPECT_EQ(back.kind, ModelKind::nlssm);
  EXPECT_EQ(back.data_seed, 3U);
  EXPECT_EQ(back.index, 1U);
  EXPECT_EQ(back.observations, data.observations);
  EXPECT_EQ(back.latents, data.latents);
}

TEST_F(HarnessTest, RunIsDeterministicAndWorkerInvariant) {
  auto a = small_lgssm("a");
  auto b = small_lgssm("b");
  b.pool.workers = 3;
  const auto ra = cmd_run(a);
  const auto rb = cmd_run(b);
  EXPECT_EQ(ra.manifest_hash, rb.manifest_hash);
  EXPECT_NE(slurp(ra.directory / "status.txt").find("\ncomplete\n"), std::string::npos);
  for (const char* name : {"records.csv", "zeta.csv", "particles.csv", "summary.csv", "estimates.csv",
                           "metrics_per_step.csv", "histograms.csv"}) {
    EXPECT_EQ(slurp(ra.directory / name), slurp(rb.directory / name)) << name;
    EXPECT_EQ(slurp(ra.directory / name).rfind("# manifest=" + ra.manifest_hash, 0), 0U) << name;
  }
}

TEST_F(HarnessTest, MetricsRecomputeIsIdentical) {
  const auto run = cmd_run(small_lgssm("a"));
  cmd_metrics(run.directory, root_ / "again");
  for (const char* name : {"summary.csv", "estimates.csv", "metrics_per_step.csv", "metrics_per_record.csv",
                           "histograms.csv"}) {
    EXPECT_EQ(slurp(run.directory / name), slurp(root_ / "again" / name)) << name;
  }
}

TEST_F(HarnessTest, FullConditionalPoolMatchesMultiStartGibbs) {
  auto a = small_lgssm("a");
  a.pool.conditional = a.pool.nodes;
  auto b = small_lgssm("b");
  b.sampler = SamplerKind::mpg;
  b.pool.conditional = b.pool.nodes;
  const auto ra = cmd_run(a);
  const auto rb = cmd_run(b);
  EXPECT_EQ(slurp(ra.directory / "records.csv").substr(slurp(ra.directory / "records.csv").find('\n')),
            slurp(rb.directory / "records.csv").substr(slurp(rb.directory / "records.csv").find('\n')));
  auto body = [](const std::string& text) { return text.substr(text.find('\n')); };
  EXPECT_EQ(body(slurp(ra.directory / "estimates.csv")), body(slurp(rb.directory / "estimates.csv")));
}

TEST_F(HarnessTest, GridSweepResumes) {
  auto config = small_lgssm("sweep");
  config.output.particles = false;
  config.output.histogram_steps.clear();
  config.sweep.nodes = {3};
  config.sweep.conditional = {1};
  config.sweep.datasets = 2;
  const auto first = cmd_sweep(config);
  ASSERT_EQ(first.cells.size(), 4U);
  for (const auto& cell : first.cells) {
    EXPECT_TRUE(cell.ok) << cell.error;
  }
  ASSERT_EQ(first.rows.size(), 2U);
  const auto stamp = fs::last_write_time(first.cells.front().directory / "records.csv");
  const auto second = cmd_sweep(config);
  EXPECT_EQ(fs::last_write_time(second.cells.front().directory / "records.csv"), stamp);
  for (std::size_t k = 0; k < first.cells.size(); ++k) {
    EXPECT_EQ(first.cells[k].final_mse, second.cells[k].final_mse);
  }
  EXPECT_TRUE(fs::exists(config.output.directory / "sweep.csv"));
}

TEST_F(HarnessTest, SwitchingSweepWritesTable) {
  auto config = parse("[sweep]\nmode=switching\nnodes=4\nsigmas=0.5,3\ntrials=2000\n");
  config.output.directory = root_ / "sw";
  (void)cmd_sweep(config);
  CsvReader in(config.output.directory / "switching.csv");
  std::vector<std::string> row;
  std::size_t rows = 0;
  while (in.next(row)) {
    ++rows;
  }
  EXPECT_EQ(rows, 8U);
}

TEST_F(HarnessTest, OracleWritesTruth) {
  auto config = parse("[model]\nkind=lgssm1d\nhorizon=5\n");
  config.output.directory = root_ / "oracle";
  cmd_oracle(config);
  CsvReader in(config.output.directory / "truth.csv");
  EXPECT_FALSE(in.comment_value("log_evidence").empty());
  std::vector<std::string> row;
  std::size_t rows = 0;
  while (in.next(row)) {
    ++rows;
  }
  EXPECT_EQ(rows, 5U);
}

TEST_F(HarnessTest, HmmSmokeRunIsFast) {
  auto config = parse(
      "[model]\nkind=hmm\nhorizon=3\n"
      "[sampler]\nkind=ipmcmc\nnodes=4\nconditional=2\nparticles=5\niterations=200\n");
  config.output.directory = root_ / "hmm";
  const auto started = std::chrono::steady_clock::now();
  const auto run = cmd_run(config);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(), 5.0);
  EXPECT_EQ(run.summary.iterations, 200U);
}

}  // namespace
}  // namespace ipmcmc::harness
