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

// Random privacy: the guarantee for neighbouring databases drawn from a data
// distribution, tested by repeating a two-database tester on sampled pairs.

#ifndef DPAUDIT_RANDOM_PRIVACY_H_
#define DPAUDIT_RANDOM_PRIVACY_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/test_outcome.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

// An ordered database of item indices into the data universe.
using Database = std::vector<int>;

struct DataDistribution {
  DiscreteDistribution universe;
  int db_size = 1;

  absl::Status Validate() const;
};

nlohmann::json ToJson(const DataDistribution& dd);
absl::StatusOr<DataDistribution> DataDistributionFromJson(
    const nlohmann::json& json);

// L1 distance between the count vectors of two databases over a universe of
// `universe_size` items.
absl::StatusOr<int64_t> CountL1Distance(const Database& a, const Database& b,
                                        int universe_size);

// D ~ universe^db_size and z ~ universe; returns (D, D with its first item
// replaced by z).
std::pair<Database, Database> SampleNeighborPair(const DataDistribution& dd,
                                                 Rng& rng);

// What a family resolves a database to.
struct FamilyMember {
  std::shared_ptr<const Sampler> sampler;
  // Ground truth, for the harness and for perfect-tester substitution.
  std::optional<DiscreteDistribution> truth;
  // Claimed distribution, served as side information to full-information
  // inner testers.
  std::optional<DiscreteDistribution> claim;
};

// The collection {P_D}: a resolver from databases to output samplers over a
// common [n].
class MechanismFamily {
 public:
  using Resolver =
      std::function<absl::StatusOr<FamilyMember>(const Database&)>;

  MechanismFamily(int universe_size, Resolver resolver);

  // Every database maps to `dist`.
  static MechanismFamily Constant(DiscreteDistribution dist);
  // A database maps to members[D[0]]; all members share one universe.
  static absl::StatusOr<MechanismFamily> ByFirstItem(
      std::vector<DiscreteDistribution> members);
  // {"family": "constant", "distribution": {...}} or
  // {"family": "first_item", "members": [{...}, ...]}.
  static absl::StatusOr<MechanismFamily> FromJson(const nlohmann::json& json);

  int universe_size() const { return n_; }
  absl::StatusOr<FamilyMember> Resolve(const Database& db) const;

 private:
  int n_ = 0;
  Resolver resolver_;
};

// One sampled neighbouring pair as seen by the inner tester.
struct NeighborInstance {
  MechanismPair* mech = nullptr;
  // Present when both databases resolved with a claim.
  std::optional<SideInfo> side;
  // Present when both databases resolved with a truth.
  std::optional<TruthPair> truth;
};

using TwoDatabaseTester =
    std::function<absl::StatusOr<TestOutcome>(NeighborInstance&, Rng&)>;

// k = max(1, ceil(18 ln(2 w / alpha))): majority runs bringing a 1/3 failure
// rate down to alpha / (2 w).
absl::StatusOr<int> AmplificationReps(double penalty_weight, double alpha);

// m = ceil(ln 3 (2 (alpha/(2w) + gamma)^2 + 2 alpha/w) / (alpha/w)^2).
absl::StatusOr<int> TrialCount(double penalty_weight, double alpha,
                               double gamma);

struct RandomPrivacyConfig {
  double gamma = 0.0;
  double alpha = 0.1;
  double penalty_weight = 1.0;
  // Override the derived m and k (tests and small-budget debugging).
  std::optional<int> trials;
  std::optional<int> repetitions;

  absl::Status Validate() const;
};

// For each of m sampled pairs, runs the inner tester k times on a fresh
// reseeding of the pair and records x_i = floor(1/2 + rejection rate); an
// exact tie counts as a rejection. ACCEPT iff y = mean(x_i) <=
// gamma + alpha / w.
absl::StatusOr<TestOutcome> RandomPrivacyTest(const MechanismFamily& fam,
                                              const DataDistribution& dd,
                                              const TwoDatabaseTester& tester,
                                              const RandomPrivacyConfig& cfg,
                                              Rng& rng);

}  // namespace dpaudit

#endif  // DPAUDIT_RANDOM_PRIVACY_H_
