// Copyright 2026 The dp-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpaudit/harness.h"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dpaudit/tester_noinfo.h"
#include "gtest/gtest.h"
#include "tests/test_util.h"

namespace dpaudit {
namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("dpaudit_harness_" + name))
      .string();
}

ExperimentConfig RrConfig(int trials) {
  ExperimentConfig cfg;
  cfg.tester = kAdpNoInfo;
  cfg.params = {{"eps", std::log(3.0)}, {"delta", 0.0}, {"alpha", 0.2}};
  cfg.mechanism = {{"mechanism", "randomized_response"}, {"flip_prob", 0.25}};
  cfg.trials = trials;
  cfg.seed = 5;
  return cfg;
}

TEST(WilsonTest, KnownValues) {
  const WilsonInterval w = Wilson95(50, 100);
  EXPECT_NEAR(w.lo, 0.4038, 1e-4);
  EXPECT_NEAR(w.hi, 0.5962, 1e-4);
  const WilsonInterval all = Wilson95(10, 10);
  EXPECT_DOUBLE_EQ(all.hi, 1.0);
  EXPECT_NEAR(all.lo, 0.7225, 1e-4);
  EXPECT_EQ(Wilson95(0, 0).lo, 0.0);
  EXPECT_NEAR(Wilson95(130, 200).lo,
              ::dpaudit::testing::WilsonLower(130, 200), 1e-12);
}

TEST(RunExperimentTest, SingleTrialIsOneRow) {
  ASSERT_OK_AND_ASSIGN(auto result, RunExperiment(RrConfig(1)));
  ASSERT_EQ(result.oc.rows.size(), 1u);
  EXPECT_EQ(result.oc.rows[0].trials, 1);
  EXPECT_EQ(result.records.size(), 1u);
  EXPECT_DOUBLE_EQ(result.oc.rows[0].distance, 0.0);
  const auto& rec = result.records[0];
  EXPECT_DOUBLE_EQ(result.oc.rows[0].mean_queries,
                   rec.outcome.total_queries());
}

TEST(RunExperimentTest, CompletenessOnPrivateMechanism) {
  ASSERT_OK_AND_ASSIGN(auto result, RunExperiment(RrConfig(30)));
  const OcRow& row = result.oc.rows[0];
  EXPECT_GE(row.accept_rate, 2.0 / 3.0 - (row.accept_rate - row.interval.lo));
  EXPECT_LE(row.interval.lo, row.accept_rate);
  EXPECT_GE(row.interval.hi, row.accept_rate);
}

TEST(RunExperimentTest, SameSeedGivesIdenticalCsv) {
  ExperimentConfig cfg = RrConfig(8);
  cfg.output_path = TempPath("a.csv");
  ASSERT_OK(RunExperiment(cfg).status());
  const std::string first = ReadFile(cfg.output_path);
  ASSERT_OK(RunExperiment(cfg).status());
  EXPECT_EQ(ReadFile(cfg.output_path), first);
  EXPECT_EQ(first.substr(0, first.find('\n')), CsvHeader());
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 9);
  std::remove(cfg.output_path.c_str());
}

TEST(RunExperimentTest, ThreadCountDoesNotChangeRecords) {
  ExperimentConfig cfg = RrConfig(9);
  ASSERT_OK_AND_ASSIGN(auto serial, RunExperiment(cfg));
  cfg.threads = 3;
  ASSERT_OK_AND_ASSIGN(auto parallel, RunExperiment(cfg));
  EXPECT_EQ(ToCsv(serial.records), ToCsv(parallel.records));
}

TEST(RunExperimentTest, QueriesMatchCounters) {
  ExperimentConfig cfg = RrConfig(4);
  cfg.params["poissonize"] = false;
  ASSERT_OK_AND_ASSIGN(auto result, RunExperiment(cfg));
  const int64_t budget = static_cast<int64_t>(
      std::ceil(AdpNiRate(2, std::log(3.0), 0.2)));
  for (const auto& rec : result.records) {
    EXPECT_EQ(rec.outcome.queries_used,
              (std::array<int64_t, 2>{budget, budget}));
  }
  EXPECT_DOUBLE_EQ(result.oc.rows[0].mean_queries, 2.0 * budget);
}

TEST(RunExperimentTest, Errors) {
  ExperimentConfig cfg = RrConfig(0);
  EXPECT_FALSE(RunExperiment(cfg).ok());
  cfg = RrConfig(1);
  cfg.tester = "bogus";
  EXPECT_FALSE(RunExperiment(cfg).ok());
  cfg = RrConfig(1);
  cfg.mechanism = {{"mechanism", "nope"}};
  EXPECT_FALSE(RunExperiment(cfg).ok());
  cfg = RrConfig(1);
  cfg.output_path = "/nonexistent-dir/x.csv";
  EXPECT_FALSE(RunExperiment(cfg).ok());
  cfg = RrConfig(1);
  cfg.tester = kAdpFullInfo;
  EXPECT_FALSE(RunExperiment(cfg).ok());  // no side information
  cfg.tester = kRandomPrivacy;
  EXPECT_FALSE(RunExperiment(cfg).ok());  // no family
}

TEST(RunExperimentTest, FixtureAndSideFromTruth) {
  ExperimentConfig cfg;
  cfg.tester = kPdpFullInfo;
  cfg.params = {{"eps", 0.5}, {"alpha", 0.02}};
  cfg.mechanism = {{"fixture", "fi_pdp"},
                   {"params", {{"eps", 0.5}, {"alpha", 0.2}, {"beta", 0.1}}},
                   {"instance", "private"}};
  cfg.trials = 2;
  ASSERT_OK_AND_ASSIGN(auto result, RunExperiment(cfg));
  EXPECT_EQ(result.records.size(), 2u);

  ExperimentConfig rr = RrConfig(2);
  rr.tester = kAdpFullInfo;
  rr.side = nlohmann::json{{"from_truth", true}};
  ASSERT_OK_AND_ASSIGN(auto fi, RunExperiment(rr));
  EXPECT_EQ(fi.records.size(), 2u);
}

TEST(ExperimentConfigTest, FromJson) {
  ASSERT_OK_AND_ASSIGN(
      auto cfg,
      ExperimentConfigFromJson(
          {{"tester", "adp-fi"},
           {"params", {{"eps", 1.0}, {"alpha", 0.2}}},
           {"mechanism", {{"mechanism", "randomized_response"},
                          {"flip_prob", 0.25}}},
           {"side", {{"from_truth", true}}},
           {"trials", 3},
           {"seed", 11}}));
  EXPECT_EQ(cfg.tester, kAdpFullInfo);
  EXPECT_EQ(cfg.trials, 3);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_TRUE(cfg.side.has_value());
  EXPECT_FALSE(cfg.family.has_value());
  ASSERT_OK_AND_ASSIGN(auto result, RunExperiment(cfg));
  const nlohmann::json j = ToJson(result);
  EXPECT_EQ(j["records"].size(), 3u);
  EXPECT_EQ(j["records"][2]["trial"], 2);
  EXPECT_FALSE(ExperimentConfigFromJson({{"trials", "many"}}).ok());
  EXPECT_FALSE(ExperimentConfigFromJson({{"trials", 0}}).ok());
  EXPECT_FALSE(ExperimentConfigFromJson(nlohmann::json::array()).ok());
}

TEST(SweepTest, EmptyValuesAndUnknownParameter) {
  ASSERT_OK_AND_ASSIGN(auto none, Sweep(RrConfig(1), "alpha", {}));
  EXPECT_TRUE(none.empty());
  const std::vector<double> one = {0.2};
  EXPECT_FALSE(Sweep(RrConfig(1), "no_such_knob", one).ok());
}

TEST(SweepTest, AlphaHalvingQuadruplesQueries) {
  ExperimentConfig cfg = RrConfig(2);
  cfg.params["poissonize"] = false;
  const std::vector<double> alphas = {0.4, 0.2, 0.1};
  ASSERT_OK_AND_ASSIGN(auto ocs, Sweep(cfg, "alpha", alphas));
  ASSERT_EQ(ocs.size(), 3u);
  for (int i = 0; i + 1 < 3; ++i) {
    EXPECT_NEAR(ocs[i + 1].rows[0].mean_queries / ocs[i].rows[0].mean_queries,
                4.0, 0.01);
  }
}

TEST(SweepTest, SuffixesOutputPaths) {
  ExperimentConfig cfg = RrConfig(1);
  cfg.output_path = TempPath("sweep.csv");
  const std::vector<double> flips = {0.25, 0.3};
  ASSERT_OK(Sweep(cfg, "flip_prob", flips).status());
  for (int i = 0; i < 2; ++i) {
    const std::string path = TempPath("sweep_" + std::to_string(i) + ".csv");
    EXPECT_TRUE(std::filesystem::exists(path)) << path;
    std::remove(path.c_str());
  }
}

TEST(LogLogSlopeTest, RecoversPowerLaw) {
  const std::vector<double> x = {4, 16, 64, 256};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::sqrt(v));
  EXPECT_NEAR(*LogLogSlope(x, y), 0.5, 1e-12);
  EXPECT_FALSE(LogLogSlope(std::vector<double>{1.0}, std::vector<double>{1.0})
                   .ok());
}

TEST(CsvTest, FormatsSpecialValues) {
  TrialRecord rec;
  rec.trial = 3;
  rec.outcome.verdict = Verdict::kReject;
  rec.outcome.statistic = std::numeric_limits<double>::infinity();
  rec.outcome.threshold = 0.1;
  rec.outcome.queries_used = {7, 8};
  rec.outcome.diagnostics["r0"] = 7;
  const std::vector<TrialRecord> records = {rec};
  const std::string csv = ToCsv(records);
  EXPECT_NE(csv.find("3,REJECT,inf,0.10000000000000001,7,7,8"),
            std::string::npos)
      << csv;
}

}  // namespace
}  // namespace dpaudit
