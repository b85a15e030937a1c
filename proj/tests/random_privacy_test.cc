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

#include <cmath>
#include <vector>

#include "dpaudit/distribution.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/tester_noinfo.h"
#include "gtest/gtest.h"
#include "tests/test_util.h"

namespace dpaudit {
namespace {

using ::dpaudit::testing::Dist;

TestOutcome Verdicted(bool accept) {
  TestOutcome out;
  out.verdict = accept ? Verdict::kAccept : Verdict::kReject;
  return out;
}

TEST(NeighborPairTest, DifferInAtMostOneItem) {
  const DataDistribution dd{Dist({0.2, 0.3, 0.5}), 6};
  Rng rng(1);
  int differing = 0;
  for (int t = 0; t < 2000; ++t) {
    const auto [d, nb] = SampleNeighborPair(dd, rng);
    ASSERT_EQ(d.size(), 6u);
    ASSERT_EQ(nb.size(), 6u);
    ASSERT_OK_AND_ASSIGN(int64_t l1, CountL1Distance(d, nb, 3));
    EXPECT_LE(l1, 2);
    EXPECT_TRUE(std::equal(d.begin() + 1, d.end(), nb.begin() + 1));
    differing += l1 > 0;
  }
  // P(items differ) = 1 - sum p_i^2 = 0.62.
  EXPECT_NEAR(differing / 2000.0, 0.62, 0.05);
}

TEST(NeighborPairTest, PointMassGivesIdenticalDatabases) {
  const DataDistribution dd{DiscreteDistribution::PointMass(4, 2), 3};
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto [d, nb] = SampleNeighborPair(dd, rng);
    EXPECT_EQ(d, nb);
    EXPECT_EQ(d, (Database{2, 2, 2}));
  }
}

TEST(NeighborPairTest, FirstItemFollowsUniverse) {
  const auto u = Dist({0.1, 0.6, 0.3});
  const DataDistribution dd{u, 2};
  Rng rng(3);
  std::vector<double> first(3, 0.0), replaced(3, 0.0);
  const int trials = 5000;
  for (int t = 0; t < trials; ++t) {
    const auto [d, nb] = SampleNeighborPair(dd, rng);
    first[d[0]] += 1.0 / trials;
    replaced[nb[0]] += 1.0 / trials;
  }
  EXPECT_LE(*TvDistance(u, *MakeDistribution(first)), 0.05);
  EXPECT_LE(*TvDistance(u, *MakeDistribution(replaced)), 0.05);
}

TEST(CountL1DistanceTest, CountsAndErrors) {
  EXPECT_EQ(*CountL1Distance({0, 1, 1}, {1, 1, 0}, 2), 0);
  EXPECT_EQ(*CountL1Distance({0, 1, 1}, {2, 1, 1}, 3), 2);
  EXPECT_FALSE(CountL1Distance({5}, {0}, 3).ok());
}

TEST(DataDistributionTest, JsonAndValidation) {
  const DataDistribution dd{Dist({0.25, 0.75}), 4};
  ASSERT_OK_AND_ASSIGN(auto back, DataDistributionFromJson(ToJson(dd)));
  EXPECT_EQ(back.universe, dd.universe);
  EXPECT_EQ(back.db_size, 4);
  EXPECT_FALSE(DataDistributionFromJson({{"universe", ToJson(dd.universe)},
                                         {"db_size", 0}})
                   .ok());
  EXPECT_FALSE(DataDistributionFromJson(nlohmann::json::object()).ok());
}

TEST(MechanismFamilyTest, ResolvesMembers) {
  ASSERT_OK_AND_ASSIGN(auto fam, MechanismFamily::ByFirstItem(
                                     {Dist({0.5, 0.5}), Dist({0.9, 0.1})}));
  EXPECT_EQ(fam.universe_size(), 2);
  ASSERT_OK_AND_ASSIGN(auto member, fam.Resolve({1, 0}));
  EXPECT_EQ(*member.truth, Dist({0.9, 0.1}));
  EXPECT_EQ(*member.claim, Dist({0.9, 0.1}));
  EXPECT_FALSE(fam.Resolve({2}).ok());
  EXPECT_FALSE(
      MechanismFamily::ByFirstItem({Dist({1.0}), Dist({0.5, 0.5})}).ok());
  EXPECT_FALSE(MechanismFamily::ByFirstItem({}).ok());

  const auto c = MechanismFamily::Constant(Dist({0.3, 0.7}));
  ASSERT_OK_AND_ASSIGN(auto any, c.Resolve({0, 1, 0}));
  EXPECT_EQ(*any.truth, Dist({0.3, 0.7}));
}

TEST(MechanismFamilyTest, FromJson) {
  ASSERT_OK_AND_ASSIGN(
      auto fam,
      MechanismFamily::FromJson({{"family", "first_item"},
                                 {"members",
                                  {ToJson(Dist({0.5, 0.5})),
                                   ToJson(Dist({0.2, 0.8}))}}}));
  EXPECT_EQ(fam.universe_size(), 2);
  ASSERT_OK_AND_ASSIGN(
      auto c, MechanismFamily::FromJson(
                  {{"family", "constant"},
                   {"distribution", ToJson(DiscreteDistribution::Uniform(3))}}));
  EXPECT_EQ(c.universe_size(), 3);
  EXPECT_FALSE(MechanismFamily::FromJson({{"family", "other"}}).ok());
}

TEST(AmplificationTest, RepetitionsAndTrials) {
  EXPECT_EQ(*AmplificationReps(10.0, 0.1),
            static_cast<int>(std::ceil(18.0 * std::log(200.0))));
  EXPECT_EQ(*AmplificationReps(10.0, 0.1), 96);
  EXPECT_EQ(*AmplificationReps(0.1, 1.0), 1);
  EXPECT_EQ(*TrialCount(1.0, 1.0, 0.0), 3);
  EXPECT_EQ(*AmplificationReps(2.0, 0.2), 54);
  EXPECT_EQ(*TrialCount(2.0, 0.2, 0.1), 27);
  // Direct evaluation of the closed form.
  const double w = 3.0, a = 0.3, g = 0.05;
  const double expected = std::ceil(
      std::log(3.0) * (2.0 * std::pow(a / (2 * w) + g, 2) + 2.0 * a / w) /
      std::pow(a / w, 2));
  EXPECT_EQ(*TrialCount(w, a, g), static_cast<int>(expected));
  EXPECT_FALSE(AmplificationReps(1.0, 0.0).ok());
  EXPECT_FALSE(TrialCount(0.0, 0.1, 0.0).ok());
  EXPECT_FALSE(TrialCount(1.0, 0.1, -0.1).ok());
}

TEST(RandomPrivacyTest, TieCountsAsRejection) {
  const auto fam = MechanismFamily::Constant(Dist({0.5, 0.5}));
  const DataDistribution dd{Dist({0.5, 0.5}), 2};
  int calls = 0;
  const TwoDatabaseTester alternating = [&](NeighborInstance&, Rng&) {
    return absl::StatusOr<TestOutcome>(Verdicted(calls++ % 2 == 0));
  };
  RandomPrivacyConfig cfg{.gamma = 0.0, .alpha = 0.1, .trials = 5,
                          .repetitions = 2};
  Rng rng(4);
  ASSERT_OK_AND_ASSIGN(auto out,
                       RandomPrivacyTest(fam, dd, alternating, cfg, rng));
  EXPECT_EQ(out.diagnostics["far_votes"].get<int>(), 5);
  EXPECT_DOUBLE_EQ(out.statistic, 1.0);
  EXPECT_FALSE(out.accepted());
  EXPECT_EQ(calls, 10);

  cfg.repetitions = 3;
  calls = 0;
  ASSERT_OK_AND_ASSIGN(auto odd,
                       RandomPrivacyTest(fam, dd, alternating, cfg, rng));
  EXPECT_LT(odd.diagnostics["far_votes"].get<int>(), 5);
}

TEST(RandomPrivacyTest, PerfectTesterMeasuresFarMass) {
  // Items 0 and 2 share a member, so a pair is far iff exactly one first
  // item is 1: probability 2 p1 (1 - p1).
  const auto u = Dist({0.3, 0.5, 0.2});
  const DataDistribution dd{u, 3};
  ASSERT_OK_AND_ASSIGN(auto fam,
                       MechanismFamily::ByFirstItem({Dist({0.9, 0.1}),
                                                     Dist({0.1, 0.9}),
                                                     Dist({0.9, 0.1})}));
  const TwoDatabaseTester perfect = [](NeighborInstance& inst, Rng&) {
    auto d = DeltaAtEpsilon(inst.truth->p0, inst.truth->p1, 0.5);
    if (!d.ok()) return absl::StatusOr<TestOutcome>(d.status());
    return absl::StatusOr<TestOutcome>(Verdicted(*d <= 0.0));
  };
  RandomPrivacyConfig cfg{.gamma = 0.0, .alpha = 0.1, .trials = 4000,
                          .repetitions = 1};
  Rng rng(5);
  ASSERT_OK_AND_ASSIGN(auto out, RandomPrivacyTest(fam, dd, perfect, cfg, rng));
  const double far = 2 * 0.5 * 0.5;
  EXPECT_NEAR(out.statistic, far, 4.0 * std::sqrt(far * (1 - far) / 4000));
  EXPECT_EQ(out.diagnostics["inner_runs"].get<int>(), 4000);
  EXPECT_EQ(out.total_queries(), 0);
}

TEST(RandomPrivacyTest, QueryAccountingIsExact) {
  const DataDistribution dd{Dist({0.5, 0.5}), 2};
  ASSERT_OK_AND_ASSIGN(auto fam,
                       MechanismFamily::ByFirstItem(
                           {Dist({0.5, 0.5}), Dist({0.4, 0.6})}));
  const AdpNiConfig inner{.n = 2,
                          .eps = 0.1,
                          .delta = 0.1,
                          .alpha = 0.2,
                          .poissonize = false};
  const TwoDatabaseTester tester = [&](NeighborInstance& inst, Rng& rng) {
    return AdpTestNoInfo(*inst.mech, inner, rng);
  };
  RandomPrivacyConfig cfg{.gamma = 0.1, .alpha = 0.2, .penalty_weight = 2.0};
  Rng rng(6);
  ASSERT_OK_AND_ASSIGN(auto out, RandomPrivacyTest(fam, dd, tester, cfg, rng));
  const int m = out.diagnostics["m"].get<int>();
  const int k = out.diagnostics["k"].get<int>();
  EXPECT_EQ(m, 27);
  EXPECT_EQ(k, 54);
  const int64_t budget = static_cast<int64_t>(std::ceil(inner.rate()));
  EXPECT_EQ(out.queries_used[0], int64_t{m} * k * budget);
  EXPECT_EQ(out.queries_used[1], int64_t{m} * k * budget);
  EXPECT_DOUBLE_EQ(out.threshold, 0.1 + 0.2 / 2.0);
}

TEST(RandomPrivacyTest, PropagatesTesterErrors) {
  const auto fam = MechanismFamily::Constant(Dist({0.5, 0.5}));
  const DataDistribution dd{Dist({1.0}), 1};
  const TwoDatabaseTester broken = [](NeighborInstance&, Rng&) {
    return absl::StatusOr<TestOutcome>(absl::InternalError("boom"));
  };
  Rng rng(7);
  EXPECT_FALSE(RandomPrivacyTest(fam, dd, broken,
                                 RandomPrivacyConfig{.trials = 2,
                                                     .repetitions = 1},
                                 rng)
                   .ok());
  const DataDistribution bad{Dist({0.5, 0.5}), 0};
  const TwoDatabaseTester ok = [](NeighborInstance&, Rng&) {
    return absl::StatusOr<TestOutcome>(Verdicted(true));
  };
  EXPECT_FALSE(RandomPrivacyTest(fam, bad, ok, RandomPrivacyConfig{}, rng).ok());
}

}  // namespace
}  // namespace dpaudit
