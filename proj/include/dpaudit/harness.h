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

// Batch experiments: repeated tester runs against a mechanism or fixture,
// aggregated into accept rates with Wilson intervals and written as CSV.

#ifndef DPAUDIT_HARNESS_H_
#define DPAUDIT_HARNESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/fixtures.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/privacy.h"
#include "dpaudit/random_privacy.h"
#include "dpaudit/test_outcome.h"
#include "dpaudit/tester_fullinfo.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

// Tester names accepted by the harness and the CLI.
inline constexpr char kAdpNoInfo[] = "adp-ni";
inline constexpr char kAdpFullInfo[] = "adp-fi";
inline constexpr char kPdpFullInfo[] = "pdp-fi";
inline constexpr char kRandomPrivacy[] = "random";

struct ExperimentConfig {
  std::string tester = kAdpNoInfo;
  // eps, delta, alpha and tester-specific knobs: lambda_rate, beta,
  // both_directions, poissonize, identity_budget, identity_budget_constant,
  // repetitions, calibration_trials; for "random" also inner, gamma,
  // penalty, m, k.
  nlohmann::json params = nlohmann::json::object();
  // {"mechanism": ...} as accepted by MechanismFromJson, or
  // {"fixture": <name>, "params": {...}, "instance": "private" | "far"}.
  nlohmann::json mechanism = nlohmann::json::object();
  // {"q0", "q1"}; {"from_truth": true} uses the mechanism's truth. Fixtures
  // built by fi_pdp supply their own.
  std::optional<nlohmann::json> side;
  // Random privacy only.
  std::optional<nlohmann::json> family;
  std::optional<nlohmann::json> data_dist;

  int trials = 1;
  uint64_t seed = 0;
  int threads = 1;
  std::string output_path;  // CSV; nothing written when empty

  absl::Status Validate() const;
};

// {"tester", "params", "mechanism", "side", "family", "data_dist", "trials",
// "seed", "threads", "output_path"}; absent keys keep their defaults.
absl::StatusOr<ExperimentConfig> ExperimentConfigFromJson(
    const nlohmann::json& json);

struct TrialRecord {
  int trial = 0;
  TestOutcome outcome;
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval Wilson95(int64_t successes, int64_t trials);

struct OcRow {
  // Distance of the mechanism's truth from the claim; +inf when not
  // pure-DP at any eps, NaN when the truth is unknown.
  double distance = 0.0;
  int trials = 0;
  int accepts = 0;
  double accept_rate = 0.0;
  WilsonInterval interval;
  double mean_queries = 0.0;
};

struct OperatingCharacteristic {
  std::vector<OcRow> rows;  // sorted by distance
};

nlohmann::json ToJson(const OperatingCharacteristic& oc);

struct ExperimentResult {
  OperatingCharacteristic oc;
  std::vector<TrialRecord> records;
  PrivacyParams claim;
};

// {"claim", "oc", "records": [{"trial", ...outcome}]}.
nlohmann::json ToJson(const ExperimentResult& result);

// Runs cfg.trials independent trials. Trial t uses seeds derived from
// (cfg.seed, t) only; records are identical for any thread count.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg);

// trial,verdict,statistic,threshold,r,queries_0,queries_1
std::string CsvHeader();
std::string ToCsv(std::span<const TrialRecord> records);
absl::Status WriteCsv(const std::string& path,
                      std::span<const TrialRecord> records);

// One experiment per value of `parameter`, looked up in cfg.params, then in
// cfg.mechanism (or the fixture's params), then among trials/seed. Output
// paths get a "_<index>" suffix before the extension.
absl::StatusOr<std::vector<OperatingCharacteristic>> Sweep(
    const ExperimentConfig& base, const std::string& parameter,
    std::span<const double> values);

// Least-squares slope of ln y against ln x.
absl::StatusOr<double> LogLogSlope(std::span<const double> x,
                                   std::span<const double> y);

// The tester `name` with `params` as a function of an oracle alone. adp-fi
// and pdp-fi need `side`; `cache` may be null.
absl::StatusOr<OracleTester> MakeOracleTester(
    const std::string& name, const nlohmann::json& params,
    const std::optional<SideInfo>& side, CalibrationCache* cache);

}  // namespace dpaudit

#endif  // DPAUDIT_HARNESS_H_
