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

#include "dpaudit/tester_fullinfo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "dpaudit/tester_noinfo.h"

namespace dpaudit {
namespace {

// Decides the claim with a little room for rounding in e^eps products.
constexpr double kExactCheckTolerance = 1e-12;
constexpr int kMinCalibrationTrials = 100;
// Standard errors added to the target quantile level.
constexpr double kQuantileMarginZ = 3.0;

Histogram PoissonizedNullSample(const DistributionSampler& sampler,
                                double rate, Rng& rng) {
  const int64_t r = std::poisson_distribution<int64_t>(rate)(rng);
  return SampleHistogram(sampler, r, rng);
}

absl::StatusOr<double> ThresholdFromNullStatistics(std::vector<double> stats,
                                                   double confidence) {
  std::sort(stats.begin(), stats.end());
  const size_t trials = stats.size();
  const double level = std::min(
      1.0, confidence + kQuantileMarginZ *
                            std::sqrt(confidence * (1.0 - confidence) / trials));
  // Smallest k with (k + 1) / trials >= level.
  size_t k = static_cast<size_t>(std::ceil(level * trials - 1e-9));
  k = std::clamp<size_t>(k, 1, trials) - 1;
  const double at = stats[k];
  if (std::isinf(at)) {
    return absl::InternalError("null statistic is infinite at the quantile");
  }
  // ACCEPT is strict (< threshold): step just above the k-th order statistic.
  return std::nextafter(at, std::numeric_limits<double>::infinity());
}

}  // namespace

int64_t IdentityTesterConfig::budget(int n) const {
  if (sample_budget.has_value()) return *sample_budget;
  return std::max<int64_t>(
      1, static_cast<int64_t>(
             std::ceil(budget_constant * std::sqrt(static_cast<double>(n)) /
                       (alpha * alpha))));
}

absl::Status IdentityTesterConfig::Validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError("identity alpha must lie in (0, 1]");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    return absl::InvalidArgumentError("confidence must lie in (0, 1)");
  }
  if (sample_budget.has_value() && *sample_budget < 1) {
    return absl::InvalidArgumentError("sample_budget must be >= 1");
  }
  if (!(budget_constant > 0.0)) {
    return absl::InvalidArgumentError("budget_constant must be > 0");
  }
  if (threshold.has_value() && !std::isfinite(*threshold)) {
    return absl::InvalidArgumentError("threshold must be finite");
  }
  return absl::OkStatus();
}

double IdentityStatistic(const DiscreteDistribution& q,
                         std::span<const int64_t> counts, double rate) {
  double stat = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const double x = static_cast<double>(counts[i]);
    if (q[i] == 0.0) {
      if (counts[i] > 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double expected = rate * q[i];
    stat += ((x - expected) * (x - expected) - x) / expected;
  }
  return stat;
}

absl::StatusOr<double> CalibrateIdentityThreshold(
    const DiscreteDistribution& q, const IdentityTesterConfig& cfg, int trials,
    Rng& rng) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  if (trials < kMinCalibrationTrials) {
    return absl::InvalidArgumentError(absl::StrCat(
        "calibration needs at least ", kMinCalibrationTrials, " trials"));
  }
  const double rate = static_cast<double>(cfg.budget(q.size()));
  DistributionSampler sampler(q);
  std::vector<double> stats;
  stats.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    stats.push_back(
        IdentityStatistic(q, PoissonizedNullSample(sampler, rate, rng), rate));
  }
  return ThresholdFromNullStatistics(std::move(stats), cfg.confidence);
}

absl::StatusOr<TestOutcome> IdentityTest(const DiscreteDistribution& q,
                                         std::span<const int64_t> samples,
                                         const IdentityTesterConfig& cfg) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  if (!cfg.threshold.has_value()) {
    return absl::FailedPreconditionError(
        "identity test needs a calibrated threshold");
  }
  if (static_cast<int>(samples.size()) != q.size()) {
    return absl::InvalidArgumentError(
        "sample histogram does not match the null's universe");
  }
  const double rate = static_cast<double>(cfg.budget(q.size()));
  TestOutcome outcome;
  outcome.statistic = IdentityStatistic(q, samples, rate);
  outcome.threshold = *cfg.threshold;
  outcome.verdict = outcome.statistic < outcome.threshold ? Verdict::kAccept
                                                          : Verdict::kReject;
  outcome.diagnostics["rule"] = "ACCEPT iff statistic < threshold";
  outcome.diagnostics["rate"] = rate;
  if (std::isinf(outcome.statistic)) {
    outcome.diagnostics["support_violation"] = true;
  }
  return outcome;
}

int MajorityRepetitions(double target) {
  return static_cast<int>(std::ceil(18.0 * std::log(1.0 / (1.0 - target))));
}

absl::StatusOr<TestOutcome> MajorityIdentityTest(
    const DiscreteDistribution& q, TwoDatabaseOracle& mech, int db,
    const IdentityTesterConfig& cfg, int repetitions, Rng& rng) {
  if (repetitions < 1) {
    return absl::InvalidArgumentError("repetitions must be >= 1");
  }
  const double rate = static_cast<double>(cfg.budget(q.size()));
  const auto before = mech.queries();
  int accepts = 0;
  for (int k = 0; k < repetitions; ++k) {
    auto sample = PoissonizedHistogram(mech, db, rate, rng);
    if (!sample.ok()) return sample.status();
    auto run = IdentityTest(q, sample->counts, cfg);
    if (!run.ok()) return run.status();
    if (run->accepted()) ++accepts;
  }
  TestOutcome outcome;
  outcome.statistic = static_cast<double>(accepts) / repetitions;
  outcome.threshold = 0.5;
  outcome.verdict =
      2 * accepts > repetitions ? Verdict::kAccept : Verdict::kReject;
  const auto after = mech.queries();
  outcome.queries_used = {after[0] - before[0], after[1] - before[1]};
  outcome.diagnostics["rule"] = "ACCEPT iff accept fraction > threshold";
  outcome.diagnostics["accepts"] = accepts;
  outcome.diagnostics["repetitions"] = repetitions;
  return outcome;
}

CalibrationCache::CalibrationCache(const CalibrationCache& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  entries_ = other.entries_;
}

CalibrationCache& CalibrationCache::operator=(const CalibrationCache& other) {
  if (this == &other) return *this;
  std::map<std::string, nlohmann::json> copy;
  {
    std::lock_guard<std::mutex> lock(other.mu_);
    copy = other.entries_;
  }
  std::lock_guard<std::mutex> lock(mu_);
  entries_ = std::move(copy);
  return *this;
}

nlohmann::json CalibrationCache::KeyJson(const DiscreteDistribution& q,
                                         const IdentityTesterConfig& cfg) {
  return {{"n", q.size()},
          {"alpha", cfg.alpha},
          {"confidence", cfg.confidence},
          {"statistic_version", kIdentityStatisticVersion},
          {"budget", cfg.budget(q.size())},
          {"q", dpaudit::ToJson(q)["probs"]}};
}

std::optional<double> CalibrationCache::Lookup(
    const DiscreteDistribution& q, const IdentityTesterConfig& cfg) const {
  const std::string key = KeyJson(q, cfg).dump();
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second["threshold"].get<double>();
}

void CalibrationCache::Insert(const DiscreteDistribution& q,
                              const IdentityTesterConfig& cfg,
                              double threshold) {
  nlohmann::json entry = KeyJson(q, cfg);
  const std::string key = entry.dump();
  entry["threshold"] = threshold;
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key] = std::move(entry);
}

absl::StatusOr<double> CalibrationCache::GetOrCalibrate(
    const DiscreteDistribution& q, const IdentityTesterConfig& cfg, int trials,
    uint64_t seed) {
  if (auto hit = Lookup(q, cfg); hit.has_value()) return *hit;
  const std::string key = KeyJson(q, cfg).dump();
  Rng rng = DeriveRng(seed, {std::hash<std::string>{}(key),
                             static_cast<uint64_t>(trials)});
  auto threshold = CalibrateIdentityThreshold(q, cfg, trials, rng);
  if (!threshold.ok()) return threshold.status();
  Insert(q, cfg, *threshold);
  return *threshold;
}

size_t CalibrationCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

nlohmann::json CalibrationCache::ToJson() const {
  nlohmann::json entries = nlohmann::json::array();
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& [key, entry] : entries_) entries.push_back(entry);
  return {{"statistic_version", kIdentityStatisticVersion},
          {"entries", std::move(entries)}};
}

absl::StatusOr<CalibrationCache> CalibrationCache::FromJson(
    const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("entries") ||
      !json["entries"].is_array()) {
    return absl::InvalidArgumentError(
        "calibration cache JSON needs an \"entries\" array");
  }
  CalibrationCache cache;
  for (const auto& entry : json["entries"]) {
    if (!entry.contains("threshold") || !entry.contains("q")) {
      return absl::InvalidArgumentError("malformed calibration entry");
    }
    // Entries from another statistic version are stale; drop them.
    if (entry.value("statistic_version", -1) != kIdentityStatisticVersion) {
      continue;
    }
    nlohmann::json key = entry;
    key.erase("threshold");
    cache.entries_[key.dump()] = entry;
  }
  return cache;
}

absl::StatusOr<TestOutcome> AdpTestFullInfo(TwoDatabaseOracle& mech,
                                            const SideInfo& side,
                                            const AdpFiConfig& cfg, Rng& rng) {
  if (mech.universe_size() != side.universe_size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "side information covers ", side.universe_size(),
        " outcomes but the mechanism has ", mech.universe_size()));
  }
  if (!(cfg.delta >= 0.0 && cfg.delta <= 1.0)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1]");
  }
  auto claimed = DeltaAtEpsilon(side.q0, side.q1, cfg.eps);
  if (!claimed.ok()) return claimed.status();

  TestOutcome outcome;
  outcome.diagnostics["claimed_delta_eps"] = *claimed;
  if (*claimed > cfg.delta + kExactCheckTolerance) {
    outcome.verdict = Verdict::kReject;
    outcome.statistic = *claimed;
    outcome.threshold = cfg.delta;
    outcome.diagnostics["rule"] =
        "REJECT: side information is not (eps, delta)-aDP";
    outcome.diagnostics["stage"] = "exact_check";
    return outcome;
  }

  IdentityTesterConfig identity = cfg.identity;
  identity.alpha = cfg.alpha;
  const int reps = cfg.repetitions.value_or(
      MajorityRepetitions(std::sqrt(2.0 / 3.0)));
  const auto before = mech.queries();
  const std::array<const DiscreteDistribution*, 2> claims = {&side.q0,
                                                             &side.q1};
  std::array<double, 2> fractions = {0.0, 0.0};
  bool all_accept = true;
  for (int db = 0; db < 2; ++db) {
    const DiscreteDistribution& q = *claims[db];
    IdentityTesterConfig run_cfg = identity;
    if (!run_cfg.threshold.has_value()) {
      absl::StatusOr<double> threshold;
      if (cfg.cache != nullptr) {
        threshold = cfg.cache->GetOrCalibrate(q, run_cfg,
                                              cfg.calibration_trials,
                                              cfg.calibration_seed);
      } else {
        threshold =
            CalibrateIdentityThreshold(q, run_cfg, cfg.calibration_trials, rng);
      }
      if (!threshold.ok()) return threshold.status();
      run_cfg.threshold = *threshold;
    }
    auto test = MajorityIdentityTest(q, mech, db, run_cfg, reps, rng);
    if (!test.ok()) return test.status();
    fractions[db] = test->statistic;
    outcome.diagnostics[absl::StrCat("identity_threshold_", db)] =
        *run_cfg.threshold;
    outcome.diagnostics[absl::StrCat("identity_accept_fraction_", db)] =
        test->statistic;
    all_accept = all_accept && test->accepted();
  }
  const auto after = mech.queries();
  outcome.queries_used = {after[0] - before[0], after[1] - before[1]};
  outcome.verdict = all_accept ? Verdict::kAccept : Verdict::kReject;
  outcome.statistic = std::min(fractions[0], fractions[1]);
  outcome.threshold = 0.5;
  outcome.diagnostics["rule"] =
      "ACCEPT iff min identity accept fraction > threshold";
  outcome.diagnostics["stage"] = "identity";
  outcome.diagnostics["repetitions"] = reps;
  outcome.diagnostics["identity_budget"] = identity.budget(side.universe_size());
  return outcome;
}

absl::StatusOr<TestOutcome> AdpTestFullInfo(TwoDatabaseOracle& mech,
                                            const SideInfo& side, double eps,
                                            double delta, double alpha,
                                            Rng& rng) {
  AdpFiConfig cfg;
  cfg.eps = eps;
  cfg.delta = delta;
  cfg.alpha = alpha;
  return AdpTestFullInfo(mech, side, cfg, rng);
}

double FiPdpRate(int n, double alpha, double beta) {
  return std::log(static_cast<double>(n)) / (alpha * alpha * beta * beta);
}

absl::StatusOr<TestOutcome> PdpTestFullInfo(TwoDatabaseOracle& mech,
                                            const SideInfo& side,
                                            const FiPdpConfig& cfg, Rng& rng) {
  const int n = side.universe_size();
  if (mech.universe_size() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "side information covers ", n, " outcomes but the mechanism has ",
        mech.universe_size()));
  }
  if (n < 2) return absl::InvalidArgumentError("pdp-fi needs n >= 2");
  if (!(cfg.alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (!(cfg.eps >= 0.0) || std::isinf(cfg.eps)) {
    return absl::InvalidArgumentError("eps must be finite and >= 0");
  }
  const std::array<DiscreteDistribution, 2> claims = {side.q0, side.q1};
  auto min_mass = MinMass(claims);
  if (!min_mass.ok()) return min_mass.status();
  const double beta = cfg.beta.value_or(*min_mass);
  if (!(beta > 0.0) || *min_mass <= 0.0) {
    return absl::FailedPreconditionError(
        "side information has a zero-mass outcome (beta = 0); the pDP "
        "full-information guarantee is vacuous");
  }
  const double rate = cfg.lambda_rate.value_or(FiPdpRate(n, cfg.alpha, beta));
  if (!(rate > 0.0) || std::isinf(rate)) {
    return absl::InvalidArgumentError("Poisson rate must be positive");
  }

  const auto before = mech.queries();
  std::array<PoissonizedSample, 2> samples;
  int retries = 0;
  for (int db = 0; db < 2; ++db) {
    do {
      auto s = PoissonizedHistogram(mech, db, rate, rng);
      if (!s.ok()) return s.status();
      samples[db] = *std::move(s);
      if (samples[db].r == 0) ++retries;
    } while (samples[db].r == 0);
  }
  const auto after = mech.queries();

  TestOutcome outcome;
  outcome.queries_used = {after[0] - before[0], after[1] - before[1]};
  outcome.threshold = cfg.eps + 2.0 * cfg.alpha;
  outcome.diagnostics["rule"] =
      "REJECT if statistic > threshold, else ACCEPT iff all frequency ratios "
      "lie in [e^-alpha, e^alpha]";
  outcome.diagnostics["beta"] = beta;
  outcome.diagnostics["rate"] = rate;
  outcome.diagnostics["r0"] = samples[0].r;
  outcome.diagnostics["r1"] = samples[1].r;
  outcome.diagnostics["poisson_retries"] = retries;

  std::vector<double> x(n), y(n);
  double eps_hat = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = static_cast<double>(samples[0].counts[i]) / samples[0].r;
    y[i] = static_cast<double>(samples[1].counts[i]) / samples[1].r;
    if (x[i] == 0.0 || y[i] == 0.0) {
      eps_hat = std::numeric_limits<double>::infinity();
    } else {
      eps_hat = std::max(eps_hat, std::abs(std::log(x[i] / y[i])));
    }
  }
  outcome.statistic = eps_hat;
  outcome.diagnostics["eps_hat"] =
      std::isinf(eps_hat) ? nlohmann::json("inf") : nlohmann::json(eps_hat);
  if (eps_hat > outcome.threshold) {
    outcome.verdict = Verdict::kReject;
    outcome.diagnostics["stage"] = "eps_hat";
    return outcome;
  }
  const double lo = std::exp(-cfg.alpha);
  const double hi = std::exp(cfg.alpha);
  for (int i = 0; i < n; ++i) {
    const double rx = x[i] / side.q0[i];
    const double ry = y[i] / side.q1[i];
    if (rx < lo || rx > hi || ry < lo || ry > hi) {
      outcome.verdict = Verdict::kReject;
      outcome.diagnostics["stage"] = "ratio_check";
      outcome.diagnostics["failed_outcome"] = i;
      return outcome;
    }
  }
  outcome.verdict = Verdict::kAccept;
  outcome.diagnostics["stage"] = "accepted";
  return outcome;
}

std::string_view NullKindName(NullKind kind) {
  return kind == NullKind::kUniform ? "uniform" : "two_point";
}

DiscreteDistribution CanonicalNull(NullKind kind, int n) {
  if (kind == NullKind::kUniform || n < 2) return DiscreteDistribution::Uniform(n);
  std::vector<double> w(n);
  if (n == 2) {
    w = {0.7, 0.3};
  } else {
    w[0] = 0.5;
    w[1] = 0.25;
    for (int i = 2; i < n; ++i) w[i] = 0.25 / (n - 2);
  }
  return *MakeDistribution(w);
}

absl::StatusOr<DiscreteDistribution> BalancedPerturbation(
    const DiscreteDistribution& q, double alpha) {
  const int n = q.size();
  if (n < 2) return absl::InvalidArgumentError("perturbation needs n >= 2");
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return q[a] > q[b]; });
  // Greedy number partition into two halves of nearly equal mass.
  std::vector<int> side(n, 0);
  std::array<double, 2> mass = {0.0, 0.0};
  for (int i : order) {
    const int g = mass[0] <= mass[1] ? 0 : 1;
    side[i] = g;
    mass[g] += q[i];
  }
  // The lighter half grows; the heavier one shrinks.
  const int up = mass[0] <= mass[1] ? 0 : 1;
  const int down = 1 - up;
  if (mass[up] <= 0.0 || mass[down] < alpha) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot move mass ", alpha, " between halves of mass ", mass[up],
        " and ", mass[down]));
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = side[i] == up ? q[i] * (1.0 + alpha / mass[up])
                         : q[i] * (1.0 - alpha / mass[down]);
  }
  return MakeDistribution(w);
}

absl::StatusOr<ContractPoint> MeasureIdentityContract(
    NullKind kind, int n, const IdentityTesterConfig& cfg,
    int calibration_trials, int evaluation_trials, uint64_t seed) {
  const DiscreteDistribution q = CanonicalNull(kind, n);
  auto far = BalancedPerturbation(q, cfg.alpha);
  if (!far.ok()) return far.status();
  Rng calib = DeriveRng(seed, {static_cast<uint64_t>(kind),
                               static_cast<uint64_t>(n), 0});
  auto threshold = CalibrateIdentityThreshold(q, cfg, calibration_trials, calib);
  if (!threshold.ok()) return threshold.status();

  IdentityTesterConfig run = cfg;
  run.threshold = *threshold;
  const double rate = static_cast<double>(cfg.budget(n));
  DistributionSampler null_sampler(q);
  DistributionSampler far_sampler(*far);
  Rng eval = DeriveRng(seed, {static_cast<uint64_t>(kind),
                              static_cast<uint64_t>(n), 1});
  int null_accepts = 0, far_rejects = 0;
  for (int t = 0; t < evaluation_trials; ++t) {
    auto a = IdentityTest(q, PoissonizedNullSample(null_sampler, rate, eval), run);
    if (!a.ok()) return a.status();
    if (a->accepted()) ++null_accepts;
    auto b = IdentityTest(q, PoissonizedNullSample(far_sampler, rate, eval), run);
    if (!b.ok()) return b.status();
    if (!b->accepted()) ++far_rejects;
  }
  ContractPoint point;
  point.kind = kind;
  point.n = n;
  point.alpha = cfg.alpha;
  point.budget = cfg.budget(n);
  point.threshold = *threshold;
  point.null_accept_rate = static_cast<double>(null_accepts) / evaluation_trials;
  point.far_reject_rate = static_cast<double>(far_rejects) / evaluation_trials;
  return point;
}

absl::StatusOr<double> CalibrateBudgetConstant(
    std::span<const int> sizes, std::span<const double> alphas,
    double confidence, double slack, int calibration_trials,
    int evaluation_trials, double max_constant, uint64_t seed) {
  for (double c = 0.25; c <= max_constant; c *= 2.0) {
    bool ok = true;
    for (double alpha : alphas) {
      for (int n : sizes) {
        for (NullKind kind : {NullKind::kUniform, NullKind::kTwoPoint}) {
          IdentityTesterConfig cfg;
          cfg.alpha = alpha;
          cfg.confidence = confidence;
          cfg.budget_constant = c;
          auto point = MeasureIdentityContract(kind, n, cfg, calibration_trials,
                                               evaluation_trials, seed);
          if (!point.ok()) return point.status();
          if (point->null_accept_rate < confidence - slack ||
              point->far_reject_rate < confidence - slack) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
      if (!ok) break;
    }
    if (ok) return c;
  }
  return absl::NotFoundError(absl::StrCat(
      "no budget constant up to ", max_constant, " meets the contract"));
}

}  // namespace dpaudit
