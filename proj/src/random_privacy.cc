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

#include "dpaudit/random_privacy.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "absl/strings/str_cat.h"

namespace dpaudit {

absl::Status DataDistribution::Validate() const {
  if (db_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("db_size must be >= 1, got ", db_size));
  }
  if (universe.size() < 1) {
    return absl::InvalidArgumentError("data universe is empty");
  }
  return absl::OkStatus();
}

nlohmann::json ToJson(const DataDistribution& dd) {
  return {{"universe", ToJson(dd.universe)}, {"db_size", dd.db_size}};
}

absl::StatusOr<DataDistribution> DataDistributionFromJson(
    const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("universe") ||
      !json.contains("db_size") || !json["db_size"].is_number_integer()) {
    return absl::InvalidArgumentError(
        "data distribution needs \"universe\" and integer \"db_size\"");
  }
  auto universe = DistributionFromJson(json["universe"]);
  if (!universe.ok()) return universe.status();
  DataDistribution dd{*std::move(universe), json["db_size"].get<int>()};
  if (auto s = dd.Validate(); !s.ok()) return s;
  return dd;
}

absl::StatusOr<int64_t> CountL1Distance(const Database& a, const Database& b,
                                        int universe_size) {
  std::vector<int64_t> diff(universe_size, 0);
  for (const auto& [db, sign] :
       {std::pair<const Database*, int>{&a, 1}, {&b, -1}}) {
    for (int item : *db) {
      if (item < 0 || item >= universe_size) {
        return absl::InvalidArgumentError(
            absl::StrCat("item ", item, " outside universe of size ",
                         universe_size));
      }
      diff[item] += sign;
    }
  }
  int64_t total = 0;
  for (int64_t d : diff) total += d < 0 ? -d : d;
  return total;
}

std::pair<Database, Database> SampleNeighborPair(const DataDistribution& dd,
                                                 Rng& rng) {
  DistributionSampler sampler(dd.universe);
  Database d(dd.db_size);
  for (int& item : d) item = sampler.Sample(rng);
  Database neighbor = d;
  neighbor[0] = sampler.Sample(rng);
  return {std::move(d), std::move(neighbor)};
}

MechanismFamily::MechanismFamily(int universe_size, Resolver resolver)
    : n_(universe_size), resolver_(std::move(resolver)) {}

MechanismFamily MechanismFamily::Constant(DiscreteDistribution dist) {
  const int n = dist.size();
  auto sampler = std::make_shared<const DistributionSampler>(dist);
  return MechanismFamily(
      n, [sampler, dist](const Database&) -> absl::StatusOr<FamilyMember> {
        return FamilyMember{sampler, dist, dist};
      });
}

absl::StatusOr<MechanismFamily> MechanismFamily::ByFirstItem(
    std::vector<DiscreteDistribution> members) {
  if (members.empty()) {
    return absl::InvalidArgumentError("family needs at least one member");
  }
  const int n = members[0].size();
  std::vector<FamilyMember> resolved;
  for (auto& dist : members) {
    if (dist.size() != n) {
      return absl::InvalidArgumentError(
          "family members must share one output universe");
    }
    resolved.push_back(
        {std::make_shared<const DistributionSampler>(dist), dist, dist});
  }
  return MechanismFamily(
      n, [resolved = std::move(resolved)](
             const Database& db) -> absl::StatusOr<FamilyMember> {
        if (db.empty() || db[0] < 0 ||
            db[0] >= static_cast<int>(resolved.size())) {
          return absl::NotFoundError(
              "database's first item has no family member");
        }
        return resolved[db[0]];
      });
}

absl::StatusOr<MechanismFamily> MechanismFamily::FromJson(
    const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("family") ||
      !json["family"].is_string()) {
    return absl::InvalidArgumentError(
        "family JSON needs a string \"family\" field");
  }
  const std::string kind = json["family"].get<std::string>();
  if (kind == "constant") {
    if (!json.contains("distribution")) {
      return absl::InvalidArgumentError(
          "constant family needs \"distribution\"");
    }
    auto dist = DistributionFromJson(json["distribution"]);
    if (!dist.ok()) return dist.status();
    return Constant(*std::move(dist));
  }
  if (kind == "first_item") {
    if (!json.contains("members") || !json["members"].is_array()) {
      return absl::InvalidArgumentError(
          "first_item family needs a \"members\" array");
    }
    std::vector<DiscreteDistribution> members;
    for (const auto& m : json["members"]) {
      auto dist = DistributionFromJson(m);
      if (!dist.ok()) return dist.status();
      members.push_back(*std::move(dist));
    }
    return ByFirstItem(std::move(members));
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown family kind \"", kind, "\""));
}

absl::StatusOr<FamilyMember> MechanismFamily::Resolve(
    const Database& db) const {
  auto member = resolver_(db);
  if (!member.ok()) return member.status();
  if (member->sampler == nullptr ||
      member->sampler->universe_size() != n_) {
    return absl::InternalError(
        "family resolved a database outside its output universe");
  }
  return member;
}

absl::StatusOr<int> AmplificationReps(double penalty_weight, double alpha) {
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (!(penalty_weight > 0.0)) {
    return absl::InvalidArgumentError("penalty_weight must be > 0");
  }
  const double k = std::ceil(18.0 * std::log(2.0 * penalty_weight / alpha));
  return std::max(1, static_cast<int>(k));
}

absl::StatusOr<int> TrialCount(double penalty_weight, double alpha,
                               double gamma) {
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (!(gamma >= 0.0)) return absl::InvalidArgumentError("gamma must be >= 0");
  if (!(penalty_weight > 0.0)) {
    return absl::InvalidArgumentError("penalty_weight must be > 0");
  }
  const double a = alpha / penalty_weight;
  const double spread = a / 2.0 + gamma;
  const double m = std::log(3.0) * (2.0 * spread * spread + 2.0 * a) / (a * a);
  return std::max(1, static_cast<int>(std::ceil(m)));
}

absl::Status RandomPrivacyConfig::Validate() const {
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in [0, 1]");
  }
  if (!(penalty_weight > 0.0)) {
    return absl::InvalidArgumentError("penalty_weight must be > 0");
  }
  if ((trials.has_value() && *trials < 1) ||
      (repetitions.has_value() && *repetitions < 1)) {
    return absl::InvalidArgumentError("trials and repetitions must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<TestOutcome> RandomPrivacyTest(const MechanismFamily& fam,
                                              const DataDistribution& dd,
                                              const TwoDatabaseTester& tester,
                                              const RandomPrivacyConfig& cfg,
                                              Rng& rng) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  if (auto s = dd.Validate(); !s.ok()) return s;
  int m = 0, k = 0;
  if (cfg.trials.has_value()) {
    m = *cfg.trials;
  } else {
    auto derived = TrialCount(cfg.penalty_weight, cfg.alpha, cfg.gamma);
    if (!derived.ok()) return derived.status();
    m = *derived;
  }
  if (cfg.repetitions.has_value()) {
    k = *cfg.repetitions;
  } else {
    auto derived = AmplificationReps(cfg.penalty_weight, cfg.alpha);
    if (!derived.ok()) return derived.status();
    k = *derived;
  }

  const uint64_t base = rng();
  int64_t far_votes = 0;
  int64_t inner_runs = 0;
  std::array<int64_t, 2> queries = {0, 0};
  for (int i = 0; i < m; ++i) {
    Rng pair_rng = DeriveRng(base, {static_cast<uint64_t>(i), 0});
    auto [d, neighbor] = SampleNeighborPair(dd, pair_rng);
    auto m0 = fam.Resolve(d);
    if (!m0.ok()) return m0.status();
    auto m1 = fam.Resolve(neighbor);
    if (!m1.ok()) return m1.status();

    std::optional<TruthPair> truth;
    if (m0->truth.has_value() && m1->truth.has_value()) {
      truth = TruthPair{*m0->truth, *m1->truth};
    }
    auto mech = MechanismPair::FromSamplers(
        m0->sampler, m1->sampler,
        DeriveSeed(base, {static_cast<uint64_t>(i), 1}), truth);
    if (!mech.ok()) return mech.status();
    NeighborInstance instance{&*mech, std::nullopt, truth};
    if (m0->claim.has_value() && m1->claim.has_value()) {
      auto side = SideInfo::Create(*m0->claim, *m1->claim);
      if (!side.ok()) return side.status();
      instance.side = *std::move(side);
    }

    Rng tester_rng = DeriveRng(base, {static_cast<uint64_t>(i), 2});
    int rejections = 0;
    for (int j = 0; j < k; ++j) {
      auto run = tester(instance, tester_rng);
      if (!run.ok()) return run.status();
      if (!run->accepted()) ++rejections;
      ++inner_runs;
    }
    // floor(1/2 + rejections / k), computed exactly.
    if (2 * rejections >= k) ++far_votes;
    const auto used = mech->queries();
    queries[0] += used[0];
    queries[1] += used[1];
  }

  TestOutcome outcome;
  outcome.statistic = static_cast<double>(far_votes) / m;
  outcome.threshold = cfg.gamma + cfg.alpha / cfg.penalty_weight;
  outcome.verdict = outcome.statistic <= outcome.threshold ? Verdict::kAccept
                                                           : Verdict::kReject;
  outcome.queries_used = queries;
  outcome.diagnostics["rule"] = "ACCEPT iff statistic <= threshold";
  outcome.diagnostics["m"] = m;
  outcome.diagnostics["k"] = k;
  outcome.diagnostics["far_votes"] = far_votes;
  outcome.diagnostics["inner_runs"] = inner_runs;
  return outcome;
}

}  // namespace dpaudit
