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

// dp-audit: run differential-privacy testers, build and certify fixtures,
// sweep parameters and calibrate the identity tester.
//
// Exit codes: 0 completed, 1 usage error, 2 certification failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "dpaudit/fixtures.h"
#include "dpaudit/harness.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/privacy.h"
#include "dpaudit/tester_fullinfo.h"
#include "nlohmann/json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCertification = 2;

struct GlobalFlags {
  uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

absl::StatusOr<nlohmann::json> ReadJson(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    return absl::NotFoundError("cannot open \"" + path + "\"");
  }
  nlohmann::json json = nlohmann::json::parse(file, nullptr, false);
  if (json.is_discarded()) {
    return absl::InvalidArgumentError("\"" + path + "\" is not valid JSON");
  }
  return json;
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) return absl::PermissionDeniedError("cannot write \"" + path + "\"");
  file << text;
  return absl::OkStatus();
}

int Fail(const absl::Status& status) {
  std::cerr << "dp-audit: " << status << "\n";
  return kExitUsage;
}

// Numeric options shared by test and sweep; unset ones stay out of params.
struct TesterOptions {
  std::string tester;
  std::string mech_path;
  std::string fixture;
  std::string fixture_params = "{}";
  std::string instance = "private";
  std::string side_path;
  bool side_from_truth = false;
  std::string family_path;
  std::string data_dist_path;
  std::string inner = dpaudit::kAdpNoInfo;
  std::map<std::string, double> numbers;
  bool fixed_budget = false;
  bool one_direction = false;
  int trials = 1;
};

void AddTesterOptions(CLI::App* cmd, TesterOptions& opt) {
  cmd->add_option("tester", opt.tester, "adp-ni, adp-fi, pdp-fi or random")
      ->required()
      ->check(CLI::IsMember({"adp-ni", "adp-fi", "pdp-fi", "random"}));
  cmd->add_option("--mech", opt.mech_path, "mechanism config JSON");
  cmd->add_option("--fixture", opt.fixture, "fixture name instead of --mech");
  cmd->add_option("--fixture-params", opt.fixture_params,
                  "fixture params as inline JSON");
  cmd->add_option("--instance", opt.instance, "fixture instance")
      ->check(CLI::IsMember({"private", "far"}));
  cmd->add_option("--side", opt.side_path, "side information JSON {q0, q1}");
  cmd->add_flag("--side-from-truth", opt.side_from_truth,
                "use the mechanism's truth as side information");
  cmd->add_option("--family", opt.family_path, "mechanism family JSON");
  cmd->add_option("--data-dist", opt.data_dist_path, "data distribution JSON");
  cmd->add_option("--inner", opt.inner, "inner tester for random")
      ->check(CLI::IsMember({"adp-ni", "adp-fi", "pdp-fi"}));
  for (const char* name : {"eps", "delta", "alpha", "beta", "gamma",
                           "penalty", "lambda"}) {
    cmd->add_option_function<double>(
        std::string("--") + name,
        [&opt, name](double v) { opt.numbers[name] = v; });
  }
  cmd->add_option_function<double>(
      "--identity-budget",
      [&opt](double v) { opt.numbers["identity_budget"] = v; },
      "Poisson rate of each identity test");
  cmd->add_option_function<double>(
      "--repetitions", [&opt](double v) { opt.numbers["repetitions"] = v; },
      "majority repetitions (adp-fi)");
  cmd->add_option_function<double>(
      "--calibration-trials",
      [&opt](double v) { opt.numbers["calibration_trials"] = v; });
  cmd->add_option_function<double>(
      "--m", [&opt](double v) { opt.numbers["m"] = v; },
      "override the number of sampled pairs (random)");
  cmd->add_option_function<double>(
      "--k", [&opt](double v) { opt.numbers["k"] = v; },
      "override the majority repetitions per pair (random)");
  cmd->add_flag("--fixed-budget", opt.fixed_budget,
                "adp-ni: draw exactly ceil(rate) samples per database");
  cmd->add_flag("--one-direction", opt.one_direction,
                "adp-ni: test only the 0 -> 1 ordering");
  cmd->add_option("--trials", opt.trials, "number of trials")
      ->check(CLI::PositiveNumber);
}

absl::StatusOr<dpaudit::ExperimentConfig> BuildConfig(
    const TesterOptions& opt, const GlobalFlags& global) {
  dpaudit::ExperimentConfig cfg;
  cfg.tester = opt.tester;
  cfg.trials = opt.trials;
  cfg.seed = global.seed;
  cfg.threads = global.threads;
  cfg.output_path = global.out;
  for (const auto& [key, value] : opt.numbers) {
    const bool integral = key == "identity_budget" || key == "repetitions" ||
                          key == "calibration_trials" || key == "m" ||
                          key == "k";
    const std::string name = key == "lambda" ? "lambda_rate" : key;
    if (integral) {
      cfg.params[name] = static_cast<int64_t>(value);
    } else {
      cfg.params[name] = value;
    }
  }
  if (opt.fixed_budget) cfg.params["poissonize"] = false;
  if (opt.one_direction) cfg.params["both_directions"] = false;

  if (opt.tester == dpaudit::kRandomPrivacy) {
    if (opt.family_path.empty() || opt.data_dist_path.empty()) {
      return absl::InvalidArgumentError(
          "test random needs --family and --data-dist");
    }
    auto family = ReadJson(opt.family_path);
    if (!family.ok()) return family.status();
    auto dd = ReadJson(opt.data_dist_path);
    if (!dd.ok()) return dd.status();
    cfg.family = *family;
    cfg.data_dist = *dd;
    cfg.params["inner"] = opt.inner;
    return cfg;
  }

  if (!opt.fixture.empty()) {
    nlohmann::json params =
        nlohmann::json::parse(opt.fixture_params, nullptr, false);
    if (params.is_discarded()) {
      return absl::InvalidArgumentError("--fixture-params is not valid JSON");
    }
    cfg.mechanism = {{"fixture", opt.fixture},
                     {"params", params},
                     {"instance", opt.instance}};
  } else if (!opt.mech_path.empty()) {
    auto mech = ReadJson(opt.mech_path);
    if (!mech.ok()) return mech.status();
    cfg.mechanism = *mech;
  } else {
    return absl::InvalidArgumentError("need --mech or --fixture");
  }
  if (opt.side_from_truth) {
    cfg.side = nlohmann::json{{"from_truth", true}};
  } else if (!opt.side_path.empty()) {
    auto side = ReadJson(opt.side_path);
    if (!side.ok()) return side.status();
    cfg.side = *side;
  }
  return cfg;
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dp-audit: property testers for differential privacy"};
  app.require_subcommand(1);
  GlobalFlags global;
  app.add_option("--seed", global.seed, "master seed");
  app.add_option("--threads", global.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", global.out, "output path");

  // test
  TesterOptions test_opt;
  CLI::App* test = app.add_subcommand("test", "run a tester for N trials");
  test->fallthrough();
  AddTesterOptions(test, test_opt);

  // sweep
  TesterOptions sweep_opt;
  std::string sweep_param;
  std::string sweep_values;
  CLI::App* sweep =
      app.add_subcommand("sweep", "run one experiment per parameter value");
  sweep->fallthrough();
  AddTesterOptions(sweep, sweep_opt);
  sweep->add_option("--param", sweep_param, "parameter to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required();

  // fixture
  std::string fixture_name;
  std::string fixture_params = "{}";
  std::map<std::string, double> fixture_numbers;
  std::string fixture_base;
  CLI::App* fixture =
      app.add_subcommand("fixture", "build and certify a fixture");
  fixture->fallthrough();
  fixture
      ->add_option("name", fixture_name,
                   "pdp_unverifiable, adp_twopoint, adp_lowfreq, fi_pdp, "
                   "mean_sideinfo")
      ->required();
  fixture->add_option("--params", fixture_params, "params as inline JSON");
  for (const char* name : {"eps", "delta", "alpha", "beta", "A", "n"}) {
    fixture->add_option_function<double>(
        std::string("--") + name,
        [&fixture_numbers, name](double v) { fixture_numbers[name] = v; });
  }
  fixture->add_option("--base", fixture_base,
                      "mean_sideinfo base pair JSON {p0, p1}");

  // calibrate
  int calib_n = 0;
  double calib_alpha = 0.1;
  double calib_confidence = 2.0 / 3.0;
  int calib_trials = 1000;
  std::string calib_null = "uniform";
  std::string calib_q;
  std::string calib_cache;
  bool calib_constant = false;
  std::string calib_sizes = "2,4,8,16,32,64,128,256,512,1024";
  std::string calib_alphas = "0.1,0.2,0.3";
  int calib_eval_trials = 1000;
  double calib_slack = 0.02;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "calibrate identity-test thresholds or the budget constant");
  calibrate->fallthrough();
  calibrate->add_option("--n", calib_n, "universe size for a canonical null");
  calibrate->add_option("--null", calib_null, "canonical null")
      ->check(CLI::IsMember({"uniform", "two_point"}));
  calibrate->add_option("--q", calib_q, "null distribution JSON file");
  calibrate->add_option("--alpha", calib_alpha, "TV proximity");
  calibrate->add_option("--confidence", calib_confidence, "target confidence");
  calibrate->add_option("--trials", calib_trials, "calibration trials");
  calibrate->add_option("--cache", calib_cache,
                        "calibration cache JSON to read and update");
  calibrate->add_flag("--budget-constant", calib_constant,
                      "search the budget constant on the calibration grid");
  calibrate->add_option("--sizes", calib_sizes, "grid sizes");
  calibrate->add_option("--alphas", calib_alphas, "grid alphas");
  calibrate->add_option("--eval-trials", calib_eval_trials,
                        "evaluation trials per grid point");
  calibrate->add_option("--slack", calib_slack, "allowed shortfall");

  // certify
  std::string cert_mech;
  std::string cert_fixture;
  std::string cert_fixture_params = "{}";
  std::string cert_notion = "adp";
  double cert_eps = 0.0;
  double cert_delta = 0.0;
  CLI::App* certify = app.add_subcommand(
      "certify", "check a mechanism's truth or a fixture against a claim");
  certify->fallthrough();
  certify->add_option("--mech", cert_mech, "mechanism config JSON");
  certify->add_option("--fixture", cert_fixture, "fixture name");
  certify->add_option("--fixture-params", cert_fixture_params,
                      "fixture params as inline JSON");
  certify->add_option("--notion", cert_notion, "pdp or adp")
      ->check(CLI::IsMember({"pdp", "adp"}));
  certify->add_option("--eps", cert_eps, "claimed epsilon");
  certify->add_option("--delta", cert_delta, "claimed delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (test->parsed() || sweep->parsed()) {
    const bool is_sweep = sweep->parsed();
    auto cfg = BuildConfig(is_sweep ? sweep_opt : test_opt, global);
    if (!cfg.ok()) return Fail(cfg.status());
    if (!is_sweep) {
      auto result = dpaudit::RunExperiment(*cfg);
      if (!result.ok()) return Fail(result.status());
      nlohmann::json report = {{"tester", cfg->tester},
                               {"claim", dpaudit::ToJson(result->claim)},
                               {"trials", cfg->trials},
                               {"seed", cfg->seed},
                               {"oc", dpaudit::ToJson(result->oc)}};
      if (cfg->output_path.empty()) {
        std::cout << dpaudit::ToCsv(result->records);
      }
      std::cerr << report.dump(2) << "\n";
      return kExitOk;
    }
    const std::vector<double> values = ParseList(sweep_values);
    auto ocs = dpaudit::Sweep(*cfg, sweep_param, values);
    if (!ocs.ok()) return Fail(ocs.status());
    nlohmann::json rows = nlohmann::json::array();
    std::vector<double> xs, ys;
    for (size_t i = 0; i < ocs->size(); ++i) {
      nlohmann::json entry = dpaudit::ToJson((*ocs)[i]);
      entry["value"] = values[i];
      rows.push_back(entry);
      if (!(*ocs)[i].rows.empty()) {
        xs.push_back(values[i]);
        ys.push_back((*ocs)[i].rows[0].mean_queries);
      }
    }
    nlohmann::json report = {{"parameter", sweep_param}, {"sweep", rows}};
    if (auto slope = dpaudit::LogLogSlope(xs, ys); slope.ok()) {
      report["log_log_query_slope"] = *slope;
    }
    std::cout << report.dump(2) << "\n";
    return kExitOk;
  }

  if (fixture->parsed()) {
    nlohmann::json params = nlohmann::json::parse(fixture_params, nullptr,
                                                  false);
    if (params.is_discarded() || !params.is_object()) {
      return Fail(absl::InvalidArgumentError("--params is not a JSON object"));
    }
    for (const auto& [key, value] : fixture_numbers) {
      if (key == "n") {
        params[key] = static_cast<int>(value);
      } else {
        params[key] = value;
      }
    }
    if (!fixture_base.empty()) {
      auto base = ReadJson(fixture_base);
      if (!base.ok()) return Fail(base.status());
      params["base"] = *base;
    }
    auto built = dpaudit::FixtureFromJson(fixture_name, params, global.seed);
    if (!built.ok()) {
      std::cerr << "dp-audit: " << built.status() << "\n";
      return absl::IsInternal(built.status()) ? kExitCertification
                                              : kExitUsage;
    }
    if (auto s = WriteText(global.out, dpaudit::ToJson(*built).dump(2) + "\n");
        !s.ok()) {
      return Fail(s);
    }
    return kExitOk;
  }

  if (calibrate->parsed()) {
    if (calib_constant) {
      std::vector<int> sizes;
      for (double v : ParseList(calib_sizes)) sizes.push_back(static_cast<int>(v));
      const std::vector<double> alphas = ParseList(calib_alphas);
      auto c = dpaudit::CalibrateBudgetConstant(
          sizes, alphas, calib_confidence, calib_slack, calib_trials,
          calib_eval_trials, 1024.0, global.seed);
      if (!c.ok()) return Fail(c.status());
      nlohmann::json report = {{"budget_constant", *c},
                               {"statistic_version",
                                dpaudit::kIdentityStatisticVersion},
                               {"sizes", sizes},
                               {"alphas", alphas},
                               {"confidence", calib_confidence},
                               {"slack", calib_slack}};
      if (auto s = WriteText(global.out, report.dump(2) + "\n"); !s.ok()) {
        return Fail(s);
      }
      return kExitOk;
    }
    std::optional<dpaudit::DiscreteDistribution> q;
    if (!calib_q.empty()) {
      auto json = ReadJson(calib_q);
      if (!json.ok()) return Fail(json.status());
      auto dist = dpaudit::DistributionFromJson(*json);
      if (!dist.ok()) return Fail(dist.status());
      q = *dist;
    } else if (calib_n >= 1) {
      q = dpaudit::CanonicalNull(calib_null == "uniform"
                                     ? dpaudit::NullKind::kUniform
                                     : dpaudit::NullKind::kTwoPoint,
                                 calib_n);
    } else {
      return Fail(absl::InvalidArgumentError(
          "calibrate needs --q, --n or --budget-constant"));
    }
    dpaudit::CalibrationCache cache;
    if (!calib_cache.empty()) {
      std::ifstream existing(calib_cache);
      if (existing) {
        auto json = ReadJson(calib_cache);
        if (!json.ok()) return Fail(json.status());
        auto loaded = dpaudit::CalibrationCache::FromJson(*json);
        if (!loaded.ok()) return Fail(loaded.status());
        cache = *loaded;
      }
    }
    dpaudit::IdentityTesterConfig cfg;
    cfg.alpha = calib_alpha;
    cfg.confidence = calib_confidence;
    auto threshold = cache.GetOrCalibrate(*q, cfg, calib_trials, global.seed);
    if (!threshold.ok()) return Fail(threshold.status());
    nlohmann::json report = {{"n", q->size()},
                             {"alpha", calib_alpha},
                             {"confidence", calib_confidence},
                             {"budget", cfg.budget(q->size())},
                             {"threshold", *threshold}};
    if (!calib_cache.empty()) {
      if (auto s = WriteText(calib_cache, cache.ToJson().dump(2) + "\n");
          !s.ok()) {
        return Fail(s);
      }
    }
    if (auto s = WriteText(global.out, report.dump(2) + "\n"); !s.ok()) {
      return Fail(s);
    }
    return kExitOk;
  }

  if (certify->parsed()) {
    nlohmann::json report;
    bool certified = false;
    if (!cert_fixture.empty()) {
      nlohmann::json params =
          nlohmann::json::parse(cert_fixture_params, nullptr, false);
      if (params.is_discarded()) {
        return Fail(absl::InvalidArgumentError(
            "--fixture-params is not valid JSON"));
      }
      auto built = dpaudit::FixtureFromJson(cert_fixture, params, global.seed);
      if (!built.ok() && !absl::IsInternal(built.status())) {
        return Fail(built.status());
      }
      certified = built.ok();
      report = built.ok() ? dpaudit::ToJson(*built)["certification"]
                          : nlohmann::json{{"certified", false},
                                           {"error", std::string(
                                               built.status().message())}};
    } else if (!cert_mech.empty()) {
      auto json = ReadJson(cert_mech);
      if (!json.ok()) return Fail(json.status());
      auto mech = dpaudit::MechanismFromJson(*json, global.seed);
      if (!mech.ok()) return Fail(mech.status());
      const dpaudit::PrivacyParams claim =
          cert_notion == "pdp" ? dpaudit::PrivacyParams::Pure(cert_eps)
                               : dpaudit::PrivacyParams::Approx(cert_eps,
                                                                cert_delta);
      if (auto s = claim.Validate(); !s.ok()) return Fail(s);
      auto dist = dpaudit::DistanceFromClaim(mech->truth()->p0,
                                             mech->truth()->p1, claim);
      if (!dist.ok()) return Fail(dist.status());
      certified = dist->is_finite() && dist->value() <= 1e-12;
      report = {{"claim", dpaudit::ToJson(claim)},
                {"distance_from_claim",
                 dist->is_infinite() ? nlohmann::json("inf")
                                     : nlohmann::json(dist->value())},
                {"certified", certified}};
    } else {
      return Fail(absl::InvalidArgumentError("certify needs --mech or --fixture"));
    }
    if (auto s = WriteText(global.out, report.dump(2) + "\n"); !s.ok()) {
      return Fail(s);
    }
    return certified ? kExitOk : kExitCertification;
  }
  return kExitUsage;
}
