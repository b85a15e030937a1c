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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dpaudit/tester_noinfo.h"

namespace dpaudit {
namespace {

absl::StatusOr<double> Number(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params[key].is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat("tester needs numeric parameter \"", key, "\""));
  }
  return params[key].get<double>();
}

std::optional<double> OptionalNumber(const nlohmann::json& params,
                                     const char* key) {
  if (!params.contains(key) || !params[key].is_number()) return std::nullopt;
  return params[key].get<double>();
}

std::optional<int64_t> OptionalInt(const nlohmann::json& params,
                                   const char* key) {
  if (!params.contains(key) || !params[key].is_number()) return std::nullopt;
  return static_cast<int64_t>(std::llround(params[key].get<double>()));
}

bool Flag(const nlohmann::json& params, const char* key, bool fallback) {
  if (!params.contains(key) || !params[key].is_boolean()) return fallback;
  return params[key].get<bool>();
}

// A tester over an oracle plus whatever side information the caller has.
using SideAwareTester = std::function<absl::StatusOr<TestOutcome>(
    TwoDatabaseOracle&, const std::optional<SideInfo>&, Rng&)>;

absl::StatusOr<SideAwareTester> MakeSideAwareTester(
    const std::string& name, const nlohmann::json& params,
    CalibrationCache* cache) {
  auto eps = Number(params, "eps");
  if (!eps.ok()) return eps.status();
  auto alpha = Number(params, "alpha");
  if (!alpha.ok()) return alpha.status();
  const double delta = OptionalNumber(params, "delta").value_or(0.0);

  if (name == kAdpNoInfo) {
    AdpNiConfig base;
    base.eps = *eps;
    base.delta = delta;
    base.alpha = *alpha;
    base.lambda_rate = OptionalNumber(params, "lambda_rate");
    base.both_directions = Flag(params, "both_directions", true);
    base.shared_poisson_draw = Flag(params, "shared_poisson_draw", true);
    base.poissonize = Flag(params, "poissonize", true);
    return SideAwareTester(
        [base](TwoDatabaseOracle& mech, const std::optional<SideInfo>&,
               Rng& rng) {
          AdpNiConfig cfg = base;
          cfg.n = mech.universe_size();
          return AdpTestNoInfo(mech, cfg, rng);
        });
  }
  if (name == kAdpFullInfo) {
    AdpFiConfig base;
    base.eps = *eps;
    base.delta = delta;
    base.alpha = *alpha;
    base.identity.sample_budget = OptionalInt(params, "identity_budget");
    if (auto c = OptionalNumber(params, "identity_budget_constant")) {
      base.identity.budget_constant = *c;
    }
    if (auto reps = OptionalInt(params, "repetitions")) {
      base.repetitions = static_cast<int>(*reps);
    }
    if (auto trials = OptionalInt(params, "calibration_trials")) {
      base.calibration_trials = static_cast<int>(*trials);
    }
    base.calibration_seed = static_cast<uint64_t>(
        OptionalInt(params, "calibration_seed").value_or(0));
    base.cache = cache;
    return SideAwareTester([base](TwoDatabaseOracle& mech,
                                  const std::optional<SideInfo>& side,
                                  Rng& rng) -> absl::StatusOr<TestOutcome> {
      if (!side.has_value()) {
        return absl::FailedPreconditionError(
            "adp-fi needs side information");
      }
      return AdpTestFullInfo(mech, *side, base, rng);
    });
  }
  if (name == kPdpFullInfo) {
    FiPdpConfig base;
    base.eps = *eps;
    base.alpha = *alpha;
    base.beta = OptionalNumber(params, "beta");
    base.lambda_rate = OptionalNumber(params, "lambda_rate");
    return SideAwareTester([base](TwoDatabaseOracle& mech,
                                  const std::optional<SideInfo>& side,
                                  Rng& rng) -> absl::StatusOr<TestOutcome> {
      if (!side.has_value()) {
        return absl::FailedPreconditionError(
            "pdp-fi needs side information");
      }
      return PdpTestFullInfo(mech, *side, base, rng);
    });
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown tester \"", name, "\"; expected adp-ni, adp-fi or pdp-fi"));
}

absl::StatusOr<PrivacyParams> ClaimFor(const ExperimentConfig& cfg) {
  const nlohmann::json& p = cfg.params;
  const double eps = OptionalNumber(p, "eps").value_or(0.0);
  const double delta = OptionalNumber(p, "delta").value_or(0.0);
  PrivacyParams claim;
  if (cfg.tester == kPdpFullInfo) {
    claim = PrivacyParams::Pure(eps);
  } else if (cfg.tester == kRandomPrivacy) {
    const std::string inner = p.value("inner", std::string(kAdpNoInfo));
    const double gamma = OptionalNumber(p, "gamma").value_or(0.0);
    const double w = OptionalNumber(p, "penalty").value_or(1.0);
    claim = inner == kPdpFullInfo
                ? PrivacyParams::RandomPure(eps, gamma, w)
                : PrivacyParams::RandomApprox(eps, delta, gamma, w);
  } else {
    claim = PrivacyParams::Approx(eps, delta);
  }
  if (auto s = claim.Validate(); !s.ok()) return s;
  return claim;
}

struct Subject {
  std::optional<MechanismPair> mech;
  std::optional<SideInfo> side;
};

absl::StatusOr<Subject> ResolveSubject(const ExperimentConfig& cfg) {
  Subject subject;
  std::optional<SideInfo> fixture_side;
  if (cfg.mechanism.contains("fixture")) {
    if (!cfg.mechanism["fixture"].is_string()) {
      return absl::InvalidArgumentError("\"fixture\" must be a name");
    }
    auto fixture = FixtureFromJson(
        cfg.mechanism["fixture"].get<std::string>(),
        cfg.mechanism.value("params", nlohmann::json::object()),
        DeriveSeed(cfg.seed, {0xf1}));
    if (!fixture.ok()) return fixture.status();
    const std::string instance =
        cfg.mechanism.value("instance", std::string("private"));
    if (instance == "private") {
      subject.mech = std::move(fixture->private_instance);
    } else if (instance == "far") {
      subject.mech = std::move(fixture->far_instance);
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "fixture instance must be private or far, got ", instance));
    }
    if (fixture->certification.contains("side")) {
      auto side = SideInfoFromJson(fixture->certification["side"]);
      if (!side.ok()) return side.status();
      fixture_side = *std::move(side);
    }
  } else {
    auto mech = MechanismFromJson(cfg.mechanism, cfg.seed);
    if (!mech.ok()) return mech.status();
    subject.mech = *std::move(mech);
  }

  if (cfg.side.has_value()) {
    if (cfg.side->value("from_truth", false)) {
      if (!subject.mech->truth().has_value()) {
        return absl::InvalidArgumentError(
            "side information from_truth needs a mechanism with known "
            "truth");
      }
      auto side = SideInfo::Create(subject.mech->truth()->p0,
                                   subject.mech->truth()->p1);
      if (!side.ok()) return side.status();
      subject.side = *std::move(side);
    } else {
      auto side = SideInfoFromJson(*cfg.side);
      if (!side.ok()) return side.status();
      subject.side = *std::move(side);
    }
  } else {
    subject.side = fixture_side;
  }
  return subject;
}

absl::StatusOr<TwoDatabaseTester> MakeInnerTester(
    const ExperimentConfig& cfg, CalibrationCache* cache) {
  const std::string inner =
      cfg.params.value("inner", std::string(kAdpNoInfo));
  auto tester = MakeSideAwareTester(inner, cfg.params, cache);
  if (!tester.ok()) return tester.status();
  return TwoDatabaseTester(
      [tester = *std::move(tester)](NeighborInstance& instance, Rng& rng) {
        return tester(*instance.mech, instance.side, rng);
      });
}

double DistanceOrNan(const MechanismPair& mech, const PrivacyParams& claim) {
  if (!mech.truth().has_value()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  auto d = DistanceFromClaim(mech.truth()->p0, mech.truth()->p1, claim);
  if (!d.ok()) return std::numeric_limits<double>::quiet_NaN();
  return d->is_infinite() ? std::numeric_limits<double>::infinity()
                          : d->value();
}

int64_t SampleSizeColumn(const TestOutcome& outcome) {
  for (const char* key : {"r", "r0", "identity_budget", "inner_runs"}) {
    if (outcome.diagnostics.contains(key) &&
        outcome.diagnostics[key].is_number()) {
      return outcome.diagnostics[key].get<int64_t>();
    }
  }
  return 0;
}

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::string SuffixedPath(const std::string& path, size_t index) {
  if (path.empty()) return path;
  const size_t slash = path.find_last_of('/');
  const size_t dot = path.find_last_of('.');
  const std::string suffix = absl::StrCat("_", index);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

bool SetNumber(nlohmann::json& obj, const std::string& key, double value) {
  if (!obj.is_object() || !obj.contains(key)) return false;
  if (obj[key].is_number_integer()) {
    obj[key] = static_cast<int64_t>(std::llround(value));
  } else {
    obj[key] = value;
  }
  return true;
}

}  // namespace

absl::Status ExperimentConfig::Validate() const {
  if (trials < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("trials must be >= 1, got ", trials));
  }
  if (threads < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("threads must be >= 1, got ", threads));
  }
  if (!params.is_object()) {
    return absl::InvalidArgumentError("tester params must be an object");
  }
  if (tester == kRandomPrivacy) {
    if (!family.has_value() || !data_dist.has_value()) {
      return absl::InvalidArgumentError(
          "random privacy experiments need a family and a data distribution");
    }
  } else if (tester != kAdpNoInfo && tester != kAdpFullInfo &&
             tester != kPdpFullInfo) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown tester \"", tester,
        "\"; expected adp-ni, adp-fi, pdp-fi or random"));
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ExperimentConfigFromJson(
    const nlohmann::json& json) {
  if (!json.is_object()) {
    return absl::InvalidArgumentError("experiment config must be an object");
  }
  ExperimentConfig cfg;
  try {
    cfg.tester = json.value("tester", cfg.tester);
    cfg.params = json.value("params", cfg.params);
    cfg.mechanism = json.value("mechanism", cfg.mechanism);
    for (const auto& [key, field] :
         {std::pair<const char*, std::optional<nlohmann::json>*>{"side",
                                                                 &cfg.side},
          {"family", &cfg.family},
          {"data_dist", &cfg.data_dist}}) {
      if (json.contains(key) && !json[key].is_null()) *field = json[key];
    }
    cfg.trials = json.value("trials", cfg.trials);
    cfg.seed = json.value("seed", cfg.seed);
    cfg.threads = json.value("threads", cfg.threads);
    cfg.output_path = json.value("output_path", cfg.output_path);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed experiment config: ", e.what()));
  }
  if (auto s = cfg.Validate(); !s.ok()) return s;
  return cfg;
}

nlohmann::json ToJson(const ExperimentResult& result) {
  nlohmann::json records = nlohmann::json::array();
  for (const TrialRecord& rec : result.records) {
    nlohmann::json entry = ToJson(rec.outcome);
    entry["trial"] = rec.trial;
    records.push_back(std::move(entry));
  }
  return {{"claim", ToJson(result.claim)},
          {"oc", ToJson(result.oc)},
          {"records", std::move(records)}};
}

WilsonInterval Wilson95(int64_t successes, int64_t trials) {
  if (trials <= 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // Exact at the extremes.
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

nlohmann::json ToJson(const OperatingCharacteristic& oc) {
  nlohmann::json rows = nlohmann::json::array();
  for (const OcRow& row : oc.rows) {
    rows.push_back({{"distance", FormatDouble(row.distance)},
                    {"trials", row.trials},
                    {"accepts", row.accepts},
                    {"accept_rate", row.accept_rate},
                    {"wilson_lo", row.interval.lo},
                    {"wilson_hi", row.interval.hi},
                    {"mean_queries", row.mean_queries}});
  }
  return {{"rows", std::move(rows)}};
}

absl::StatusOr<OracleTester> MakeOracleTester(
    const std::string& name, const nlohmann::json& params,
    const std::optional<SideInfo>& side, CalibrationCache* cache) {
  auto tester = MakeSideAwareTester(name, params, cache);
  if (!tester.ok()) return tester.status();
  return OracleTester(
      [tester = *std::move(tester), side](TwoDatabaseOracle& mech, Rng& rng) {
        return tester(mech, side, rng);
      });
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  auto claim = ClaimFor(cfg);
  if (!claim.ok()) return claim.status();
  auto cache = std::make_shared<CalibrationCache>();

  // Each trial is a function of its index alone.
  std::function<absl::StatusOr<TestOutcome>(int)> run_trial;
  double distance = std::numeric_limits<double>::quiet_NaN();
  std::shared_ptr<const MechanismPair> prototype;
  if (cfg.tester == kRandomPrivacy) {
    auto family = MechanismFamily::FromJson(*cfg.family);
    if (!family.ok()) return family.status();
    auto dd = DataDistributionFromJson(*cfg.data_dist);
    if (!dd.ok()) return dd.status();
    auto inner = MakeInnerTester(cfg, cache.get());
    if (!inner.ok()) return inner.status();
    RandomPrivacyConfig rp;
    rp.gamma = OptionalNumber(cfg.params, "gamma").value_or(0.0);
    rp.penalty_weight = OptionalNumber(cfg.params, "penalty").value_or(1.0);
    auto alpha = Number(cfg.params, "alpha");
    if (!alpha.ok()) return alpha.status();
    rp.alpha = *alpha;
    if (auto m = OptionalInt(cfg.params, "m")) rp.trials = static_cast<int>(*m);
    if (auto k = OptionalInt(cfg.params, "k")) {
      rp.repetitions = static_cast<int>(*k);
    }
    if (auto s = rp.Validate(); !s.ok()) return s;
    run_trial = [fam = *std::move(family), dd = *std::move(dd),
                 inner = *std::move(inner), rp, seed = cfg.seed](int t) {
      Rng rng = DeriveRng(seed, {static_cast<uint64_t>(t), 1});
      return RandomPrivacyTest(fam, dd, inner, rp, rng);
    };
  } else {
    auto subject = ResolveSubject(cfg);
    if (!subject.ok()) return subject.status();
    auto tester = MakeSideAwareTester(cfg.tester, cfg.params, cache.get());
    if (!tester.ok()) return tester.status();
    distance = DistanceOrNan(*subject->mech, *claim);
    prototype = std::make_shared<const MechanismPair>(
        std::move(*subject->mech));
    run_trial = [prototype, side = subject->side, tester = *std::move(tester),
                 seed = cfg.seed](int t) {
      MechanismPair mech =
          prototype->Reseeded(DeriveSeed(seed, {static_cast<uint64_t>(t), 0}));
      Rng rng = DeriveRng(seed, {static_cast<uint64_t>(t), 1});
      return tester(mech, side, rng);
    };
  }

  std::vector<std::optional<absl::StatusOr<TestOutcome>>> results(cfg.trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      results[t] = run_trial(t);
    }
  };
  const int threads = std::min(cfg.threads, cfg.trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.claim = *claim;
  OcRow row;
  row.distance = distance;
  row.trials = cfg.trials;
  double queries = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    if (!results[t]->ok()) return results[t]->status();
    TestOutcome& outcome = **results[t];
    if (outcome.accepted()) ++row.accepts;
    queries += static_cast<double>(outcome.total_queries());
    result.records.push_back({t, std::move(outcome)});
  }
  row.accept_rate = static_cast<double>(row.accepts) / row.trials;
  row.interval = Wilson95(row.accepts, row.trials);
  row.mean_queries = queries / row.trials;
  result.oc.rows.push_back(row);

  if (!cfg.output_path.empty()) {
    if (auto s = WriteCsv(cfg.output_path, result.records); !s.ok()) return s;
  }
  return result;
}

std::string CsvHeader() {
  return "trial,verdict,statistic,threshold,r,queries_0,queries_1";
}

std::string ToCsv(std::span<const TrialRecord> records) {
  std::string out = CsvHeader() + "\n";
  for (const TrialRecord& rec : records) {
    const TestOutcome& o = rec.outcome;
    absl::StrAppend(&out, rec.trial, ",", std::string(VerdictName(o.verdict)),
                    ",", FormatDouble(o.statistic), ",",
                    FormatDouble(o.threshold), ",", SampleSizeColumn(o), ",",
                    o.queries_used[0], ",", o.queries_used[1], "\n");
  }
  return out;
}

absl::Status WriteCsv(const std::string& path,
                      std::span<const TrialRecord> records) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open \"", path, "\" for writing"));
  }
  file << ToCsv(records);
  file.close();
  if (!file) {
    return absl::DataLossError(absl::StrCat("failed writing \"", path, "\""));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<OperatingCharacteristic>> Sweep(
    const ExperimentConfig& base, const std::string& parameter,
    std::span<const double> values) {
  std::vector<OperatingCharacteristic> out;
  for (size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg = base;
    const double v = values[i];
    bool found = SetNumber(cfg.params, parameter, v);
    if (!found && cfg.mechanism.contains("fixture") &&
        cfg.mechanism.contains("params")) {
      found = SetNumber(cfg.mechanism["params"], parameter, v);
    }
    if (!found) found = SetNumber(cfg.mechanism, parameter, v);
    if (!found && parameter == "trials") {
      cfg.trials = static_cast<int>(std::llround(v));
      found = true;
    }
    if (!found && parameter == "seed") {
      cfg.seed = static_cast<uint64_t>(std::llround(v));
      found = true;
    }
    if (!found) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown sweep parameter \"", parameter,
          "\": not a tester, mechanism or fixture field"));
    }
    cfg.output_path = SuffixedPath(base.output_path, i);
    auto result = RunExperiment(cfg);
    if (!result.ok()) return result.status();
    out.push_back(std::move(result->oc));
  }
  return out;
}

absl::StatusOr<double> LogLogSlope(std::span<const double> x,
                                   std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    return absl::InvalidArgumentError(
        "slope needs at least two matched points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      return absl::InvalidArgumentError("log-log slope needs positive data");
    }
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double var = sxx - sx * sx / n;
  if (var <= 0.0) return absl::InvalidArgumentError("x values are constant");
  return (sxy - sx * sy / n) / var;
}

}  // namespace dpaudit
