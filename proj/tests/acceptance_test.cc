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

// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpaudit/distribution.h"
#include "dpaudit/fixtures.h"
#include "dpaudit/harness.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/random_privacy.h"
#include "dpaudit/tester_fullinfo.h"
#include "dpaudit/tester_noinfo.h"

namespace dpaudit {
namespace {

// Pinned tolerances.
constexpr double kOracleTolerance = 1e-12;
constexpr double kOracleSeconds = 30.0;
constexpr double kRateFloor = 0.60;
constexpr double kWilsonFloor = 0.55;
constexpr double kSlopeTarget = 0.5;
constexpr double kSlopeTolerance = 0.1;
constexpr double kHardnessFloor = 0.98;
constexpr double kPerturbationSlack = 1e-9;
constexpr double kTightTolerance = 1e-12;
constexpr double kContractSlack = 0.02;

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

DiscreteDistribution RandomDistribution(int n, Rng& rng, double zero_prob) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(n);
  bool any = false;
  for (double& x : w) {
    x = unit(rng) < zero_prob ? 0.0 : expo(rng);
    any = any || x > 0.0;
  }
  if (!any) w[0] = 1.0;
  return *MakeDistribution(w);
}

struct Rate {
  int hits = 0;
  int trials = 0;
  double rate() const { return trials == 0 ? 0.0 : double(hits) / trials; }
  double lo() const { return Wilson95(hits, trials).lo; }
  bool Meets(double floor) const { return rate() >= floor && lo() > kWilsonFloor; }
  std::string Str(const char* what) const {
    return absl::StrFormat("%s %d/%d = %.3f (wilson lo %.3f)", what, hits,
                           trials, rate(), lo());
  }
};

absl::StatusOr<Rate> AcceptRate(const ExperimentConfig& cfg) {
  auto result = RunExperiment(cfg);
  if (!result.ok()) return result.status();
  Rate r;
  for (const auto& rec : result->records) {
    r.hits += rec.outcome.accepted();
    ++r.trials;
  }
  return r;
}

Rate Flip(Rate accept) {
  return {accept.trials - accept.hits, accept.trials};
}

CriterionResult Failed(const absl::Status& s) { return {false, std::string(s.message())}; }

CriterionResult Criterion1() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  int pairs = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + i % 9;
    const double eps = std::array<double, 3>{0.0, 0.1, 1.0}[i % 3];
    const auto p = RandomDistribution(n, rng, 0.15);
    const auto q = RandomDistribution(n, rng, 0.15);
    auto fast = DeltaAtEpsilon(p, q, eps);
    auto brute = BruteForceDelta(p, q, eps);
    if (!fast.ok()) return Failed(fast.status());
    if (!brute.ok()) return Failed(brute.status());
    worst = std::max(worst, std::abs(*fast - *brute));
    ++pairs;
  }
  const double secs = Seconds(start);
  return {worst <= kOracleTolerance && secs < kOracleSeconds,
          absl::StrFormat("%d pairs, max |diff| %.3g, %.2fs", pairs, worst,
                          secs)};
}

CriterionResult Criterion2() {
  ExperimentConfig cfg;
  cfg.tester = kAdpNoInfo;
  cfg.params = {{"eps", 0.1}, {"delta", 0.05}, {"alpha", 0.1}};
  cfg.mechanism = {{"fixture", "adp_twopoint"},
                   {"params", {{"eps", 0.1}, {"delta", 0.05}, {"alpha", 0.1}}},
                   {"instance", "private"}};
  cfg.trials = 200;
  cfg.seed = 2;
  auto priv = AcceptRate(cfg);
  if (!priv.ok()) return Failed(priv.status());
  // delta_eps = delta + 2 alpha in the far instance.
  cfg.mechanism["params"]["alpha"] = 0.2;
  cfg.mechanism["instance"] = "far";
  cfg.seed = 3;
  auto far = AcceptRate(cfg);
  if (!far.ok()) return Failed(far.status());
  const Rate rejects = Flip(*far);
  return {priv->Meets(kRateFloor) && rejects.Meets(kRateFloor),
          priv->Str("accept") + "; " + rejects.Str("reject")};
}

CriterionResult Criterion3() {
  ExperimentConfig cfg;
  cfg.tester = kAdpFullInfo;
  cfg.params = {{"eps", std::log(3.0)}, {"delta", 0.0}, {"alpha", 0.15}};
  cfg.mechanism = {{"mechanism", "randomized_response"}, {"flip_prob", 0.25}};
  cfg.side = nlohmann::json{{"from_truth", true}};
  cfg.trials = 200;
  cfg.seed = 4;
  auto accept = AcceptRate(cfg);
  if (!accept.ok()) return Failed(accept.status());

  auto rr = RandomizedResponse(0.25);
  if (!rr.ok()) return Failed(rr.status());
  auto moved = DiscreteDistribution::FromProbabilities({0.45, 0.55});
  if (!moved.ok()) return Failed(moved.status());
  const double tv = *TvDistance(*moved, rr->truth()->p0);
  ExperimentConfig far = cfg;
  far.mechanism = {{"mechanism", "distributions"},
                   {"p0", ToJson(*moved)},
                   {"p1", ToJson(rr->truth()->p1)}};
  far.side = ToJson(*SideInfo::Create(rr->truth()->p0, rr->truth()->p1));
  far.seed = 5;
  auto far_accept = AcceptRate(far);
  if (!far_accept.ok()) return Failed(far_accept.status());
  const Rate rejects = Flip(*far_accept);

  ExperimentConfig sweep;
  sweep.tester = kAdpFullInfo;
  sweep.params = {{"eps", 1.0}, {"delta", 0.0}, {"alpha", 0.15}};
  sweep.mechanism = {{"mechanism", "truncated_geometric"}, {"eps", 1.0},
                     {"n", 4}};
  sweep.side = nlohmann::json{{"from_truth", true}};
  sweep.trials = 10;
  sweep.seed = 6;
  const std::vector<double> sizes = {4, 16, 64, 256};
  auto ocs = Sweep(sweep, "n", sizes);
  if (!ocs.ok()) return Failed(ocs.status());
  std::vector<double> queries;
  for (const auto& oc : *ocs) queries.push_back(oc.rows[0].mean_queries);
  auto slope = LogLogSlope(sizes, queries);
  if (!slope.ok()) return Failed(slope.status());
  const bool slope_ok = std::abs(*slope - kSlopeTarget) <= kSlopeTolerance;
  return {accept->Meets(kRateFloor) && rejects.Meets(kRateFloor) && slope_ok,
          absl::StrCat(accept->Str("accept"), "; TV ", tv, " ",
                       rejects.Str("reject"),
                       absl::StrFormat("; slope %.3f", *slope))};
}

CriterionResult Criterion4() {
  const double eps = 0.5, fixture_alpha = 0.2, beta = 0.1;
  ExperimentConfig cfg;
  cfg.tester = kPdpFullInfo;
  cfg.params = {{"eps", eps}, {"alpha", fixture_alpha / 10.0}};
  cfg.mechanism = {
      {"fixture", "fi_pdp"},
      {"params", {{"eps", eps}, {"alpha", fixture_alpha}, {"beta", beta}}},
      {"instance", "private"}};
  cfg.trials = 100;
  cfg.seed = 7;
  auto priv = AcceptRate(cfg);
  if (!priv.ok()) return Failed(priv.status());
  cfg.mechanism["instance"] = "far";
  cfg.seed = 8;
  auto far = AcceptRate(cfg);
  if (!far.ok()) return Failed(far.status());
  const Rate rejects = Flip(*far);

  // Soundness sandwich over zoo mechanisms with truthful and wrong side
  // information.
  const double alpha = 0.05;
  struct Case {
    MechanismPair mech;
    SideInfo side;
    double claim_eps;
  };
  std::vector<Case> cases;
  auto add = [&](absl::StatusOr<MechanismPair> truth,
                 absl::StatusOr<MechanismPair> claimed, double claim_eps) {
    if (!truth.ok() || !claimed.ok()) return;
    auto side = SideInfo::Create(claimed->truth()->p0, claimed->truth()->p1);
    if (side.ok()) cases.push_back({*std::move(truth), *side, claim_eps});
  };
  add(RandomizedResponse(0.25), RandomizedResponse(0.25), std::log(3.0));
  add(RandomizedResponse(0.25), RandomizedResponse(0.25), 0.5);
  add(RandomizedResponse(0.1), RandomizedResponse(0.25), std::log(3.0));
  add(RandomizedResponse(0.4), RandomizedResponse(0.4), 0.2);
  add(TruncatedGeometric(1.0, 4), TruncatedGeometric(1.0, 4), 1.0);
  add(TruncatedGeometric(1.0, 4), TruncatedGeometric(1.0, 4), 0.3);
  add(TruncatedGeometric(2.0, 3), TruncatedGeometric(1.0, 3), 1.0);
  int accepts = 0, bad_accepts = 0, runs = 0;
  Rng rng(9);
  for (auto& c : cases) {
    const double true_eps =
        ExactPdpEpsilon(c.mech.truth()->p0, c.mech.truth()->p1)->value();
    for (int t = 0; t < 20; ++t) {
      MechanismPair mech = c.mech.Reseeded(DeriveSeed(10, {uint64_t(runs)}));
      auto out = PdpTestFullInfo(mech, c.side,
                                 FiPdpConfig{.eps = c.claim_eps, .alpha = alpha},
                                 rng);
      if (!out.ok()) return Failed(out.status());
      ++runs;
      if (out->accepted()) {
        ++accepts;
        bad_accepts += true_eps > c.claim_eps + 10.0 * alpha;
      }
    }
  }
  const double bad_lo = Wilson95(bad_accepts, accepts).lo;
  const bool sandwich = accepts == 0 || bad_lo <= 1.0 / 3.0;
  return {priv->Meets(kRateFloor) && rejects.Meets(kRateFloor) && sandwich,
          absl::StrCat(priv->Str("accept"), "; ", rejects.Str("reject"),
                       absl::StrFormat("; sandwich %d/%d accepted runs "
                                       "beyond eps+10a (%d runs)",
                                       bad_accepts, accepts, runs))};
}

CriterionResult Criterion5() {
  const double eps = 0.1, delta = 0.05, alpha = 0.1;
  auto fx = AdpTwoPointFixture(eps, delta, alpha, 11);
  if (!fx.ok()) return Failed(fx.status());
  const double tester_alpha = 0.05;
  const nlohmann::json params = {{"eps", eps},
                                 {"delta", delta},
                                 {"alpha", tester_alpha},
                                 {"poissonize", false}};
  auto tester = MakeOracleTester(kAdpNoInfo, params, std::nullopt, nullptr);
  if (!tester.ok()) return Failed(tester.status());
  const int64_t r =
      static_cast<int64_t>(std::ceil(AdpNiRate(2, eps, tester_alpha)));
  Rate side0, side1;
  for (int t = 0; t < 200; ++t) {
    MechanismPair mech =
        fx->far_instance.Reseeded(DeriveSeed(12, {uint64_t(t)}));
    Rng rng = DeriveRng(13, {uint64_t(t)});
    for (int db = 0; db < 2; ++db) {
      auto unknown = mech.Draw(db, r);
      if (!unknown.ok()) return Failed(unknown.status());
      auto guess = Distinguish(*tester, mech, *unknown, r, rng);
      if (!guess.ok()) return Failed(guess.status());
      Rate& side = db == 0 ? side0 : side1;
      side.hits += *guess == db;
      ++side.trials;
    }
  }
  return {side0.Meets(kRateFloor) && side1.Meets(kRateFloor),
          absl::StrCat("r = ", r, "; ", side0.Str("database 0"), "; ",
                       side1.Str("database 1"))};
}

CriterionResult Criterion6() {
  auto demo = RunHardnessDemo(1.0, 0.1, 10000, 500, 14);
  if (!demo.ok()) return Failed(demo.status());
  const double rate = double(demo->absent_all) / demo->trials;
  return {rate >= kHardnessFloor,
          absl::StrFormat("eps = 1, A = %.4f; psi absent from all four "
                          "streams in %d/%d = %.3f; from the differing "
                          "streams in %d/%d",
                          demo->a, demo->absent_all, demo->trials, rate,
                          demo->absent_differing, demo->trials)};
}

CriterionResult Criterion7() {
  Rng rng(15);
  double worst_excess = -1.0;
  double worst_tight = 0.0;
  int tight_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + i % 9;
    const double eps = std::array<double, 4>{0.0, 0.1, 0.5, 1.0}[i % 4];
    const double alpha = 0.005 + 0.1 * ((i * 7919) % 101) / 100.0;
    const auto p0 = RandomDistribution(n, rng, 0.2);
    const auto p1 = RandomDistribution(n, rng, 0.2);
    const double delta = *DeltaAtEpsilon(p0, p1, eps);
    const auto q0 = RandomTvPerturbation(p0, alpha, rng);
    const auto q1 = RandomTvPerturbation(p1, alpha, rng);
    if (*TvDistance(p0, q0) > alpha + 1e-12 ||
        *TvDistance(p1, q1) > alpha + 1e-12) {
      return {false, "perturbation exceeded its TV budget"};
    }
    const double bound = delta + (1.0 + std::exp(eps)) * alpha;
    worst_excess =
        std::max(worst_excess, *DeltaAtEpsilon(q0, q1, eps) - bound);

    const double limit = (1.0 - delta) / (1.0 + std::exp(eps));
    if (delta > 0.0 && alpha <= limit) {
      auto tight = TvTightPerturbation(p0, p1, eps, alpha);
      if (!tight.ok()) return Failed(tight.status());
      worst_tight =
          std::max(worst_tight, std::abs(tight->delta_after - (delta + alpha)));
      ++tight_cases;
    }
  }
  return {worst_excess <= kPerturbationSlack && worst_tight <= kTightTolerance &&
              tight_cases > 0,
          absl::StrFormat("max excess over bound %.3g; tightness max error "
                          "%.3g over %d pairs",
                          worst_excess, worst_tight, tight_cases)};
}

CriterionResult Criterion8() {
  const double gamma = 0.1, alpha = 0.2, w = 2.0;
  // 2 mu (1 - mu) = gamma + 2 alpha / w.
  const double mu = (1.0 - std::sqrt(1.0 - 2.0 * (gamma + 2.0 * alpha / w))) / 2.0;
  auto universe = DiscreteDistribution::FromProbabilities({1.0 - mu, mu});
  if (!universe.ok()) return Failed(universe.status());
  auto leaky = LeakyMechanism(0.5, 3);
  if (!leaky.ok()) return Failed(leaky.status());

  ExperimentConfig cfg;
  cfg.tester = kRandomPrivacy;
  cfg.params = {{"inner", kAdpNoInfo}, {"eps", 0.1}, {"delta", 0.1},
                {"alpha", alpha},      {"gamma", gamma}, {"penalty", w},
                {"poissonize", false}};
  cfg.data_dist = ToJson(DataDistribution{*universe, 3});
  cfg.family = nlohmann::json{{"family", "constant"},
                              {"distribution", ToJson(leaky->truth()->p0)}};
  cfg.trials = 100;
  cfg.seed = 16;
  auto constant = RunExperiment(cfg);
  if (!constant.ok()) return Failed(constant.status());

  ExperimentConfig far = cfg;
  far.family = nlohmann::json{
      {"family", "first_item"},
      {"members",
       {ToJson(leaky->truth()->p0), ToJson(leaky->truth()->p1)}}};
  far.seed = 17;
  auto far_result = RunExperiment(far);
  if (!far_result.ok()) return Failed(far_result.status());

  const int m = *TrialCount(w, alpha, gamma);
  const int k = *AmplificationReps(w, alpha);
  const int64_t budget =
      static_cast<int64_t>(std::ceil(AdpNiRate(3, 0.1, alpha)));
  const int64_t expected = int64_t{m} * k * budget;
  bool exact = true;
  Rate accept, reject;
  for (const auto* result : {&*constant, &*far_result}) {
    for (const auto& rec : result->records) {
      exact = exact && rec.outcome.queries_used[0] == expected &&
              rec.outcome.queries_used[1] == expected;
    }
  }
  for (const auto& rec : constant->records) {
    accept.hits += rec.outcome.accepted();
    ++accept.trials;
  }
  for (const auto& rec : far_result->records) {
    reject.hits += !rec.outcome.accepted();
    ++reject.trials;
  }
  return {accept.Meets(kRateFloor) && reject.Meets(kRateFloor) && exact,
          absl::StrCat(accept.Str("accept"), "; ", reject.Str("reject"),
                       "; m = ", m, ", k = ", k, ", inner budget ", budget,
                       exact ? ", queries exact" : ", QUERY MISMATCH")};
}

CriterionResult Criterion9() {
  const IdentityTesterConfig cfg{.alpha = 0.2};
  const double floor = 2.0 / 3.0 - kContractSlack;
  double min_null = 1.0, min_far = 1.0;
  for (NullKind kind : {NullKind::kUniform, NullKind::kTwoPoint}) {
    for (int n : {2, 16, 256}) {
      auto point = MeasureIdentityContract(kind, n, cfg, 2000, 2000, 18);
      if (!point.ok()) return Failed(point.status());
      min_null = std::min(min_null, point->null_accept_rate);
      min_far = std::min(min_far, point->far_reject_rate);
    }
  }
  return {min_null >= floor && min_far >= floor,
          absl::StrFormat("min null accept %.3f, min far reject %.3f "
                          "(floor %.3f)",
                          min_null, min_far, floor)};
}

}  // namespace
}  // namespace dpaudit

int main() {
  using Check = std::function<dpaudit::CriterionResult()>;
  const std::vector<std::pair<const char*, Check>> criteria = {
      {"delta_at_epsilon matches the event-enumeration oracle",
       dpaudit::Criterion1},
      {"adp-ni completeness and soundness on the two-point fixture",
       dpaudit::Criterion2},
      {"adp-fi on randomized response, perturbed truth and sqrt(n) queries",
       dpaudit::Criterion3},
      {"pdp-fi on the full-information fixture and soundness sandwich",
       dpaudit::Criterion4},
      {"distinguishing databases through the tester", dpaudit::Criterion5},
      {"rare-outcome hardness demonstration", dpaudit::Criterion6},
      {"TV perturbation bound and tightness", dpaudit::Criterion7},
      {"random privacy conversion", dpaudit::Criterion8},
      {"identity tester contract", dpaudit::Criterion9},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const dpaudit::CriterionResult v = criteria[i].second();
    failures += !v.pass;
    std::printf("[%s] criterion %zu: %s: %s (%.1fs)\n",
                v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str(), dpaudit::Seconds(start));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
