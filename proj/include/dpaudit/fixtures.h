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

// Lower-bound constructions as certified mechanism pairs, the tight TV
// perturbation, and the verify-to-distinguish reduction.

#ifndef DPAUDIT_FIXTURES_H_
#define DPAUDIT_FIXTURES_H_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/privacy.h"
#include "dpaudit/test_outcome.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

// Outcome labels of the small constructions.
inline constexpr int kPsi = 0;
inline constexpr int kOmega = 1;
inline constexpr int kPhi = 2;

// A private instance meeting `claim` and a far instance at least alpha away
// from it. Both are certified against their truths when built; construction
// fails with kInternal if a check does not hold.
struct FixturePair {
  std::string name;
  MechanismPair private_instance;
  MechanismPair far_instance;
  nlohmann::json params;
  PrivacyParams claim;
  // {"checks": [{"name", "value", "bound", "relation", "pass"}, ...],
  //  "certified": bool, plus construction-specific reference values}.
  nlohmann::json certification;
};

// Truths, claim, params and certification report.
nlohmann::json ToJson(const FixturePair& fixture);

// n = 2. P0 = Q0 = (e^{-A-eps}, 1 - e^{-A-eps}), P1 = (e^{-A}, 1 - e^{-A}),
// Q1 = (e^{-2A}, 1 - e^{-2A}). The private pair is eps-pDP, the far pair is
// (A - eps)-pDP; they differ only on an outcome of mass about e^{-A}.
// Requires A > 2 eps + alpha.
absl::StatusOr<FixturePair> PdpUnverifiableFixture(double eps, double alpha,
                                                   double a,
                                                   uint64_t seed = 0);

// n = 2. P0 = Q0 uniform, P1 = (e^eps/2 + delta, ...), Q1 shifts alpha more
// mass onto psi. Directional delta_eps (P1 against P0) is delta for the
// private pair and delta + alpha for the far pair. Requires
// e^eps/2 + delta + alpha < 1.
absl::StatusOr<FixturePair> AdpTwoPointFixture(double eps, double delta,
                                               double alpha,
                                               uint64_t seed = 0);

// [n] = R1 | R2 | R3, contiguous blocks of n/3. With a = (2 delta + alpha)/3
// and b = 2a: P0 = P1 = Q0 put 3b/n on each R1 outcome and 3(1 - b)/n on
// each R2 outcome; Q1 moves the R1 mass onto R3. Claim is (0, delta)-aDP.
// Requires n % 3 == 0, delta > alpha, b <= 1.
absl::StatusOr<FixturePair> AdpLowFreqFixture(int n, double delta,
                                              double alpha, uint64_t seed = 0);

struct FiPdpFixtureResult {
  SideInfo side;
  FixturePair pair;
};

// n = 3. Q0 = (beta, beta, 1 - 2 beta), Q1 = (e^eps beta, beta,
// 1 - (1 + e^eps) beta): exactly eps-pDP and the private truth. The far
// truth replaces P0 with (e^{-alpha} beta, (2 - e^{-alpha}) beta, 1 - 2 beta),
// exactly (eps + alpha)-pDP. Requires 0 < eps < ln 2, 0 < beta < 1/2 and
// (1 + e^eps) beta < 1.
absl::StatusOr<FiPdpFixtureResult> FiPdpFixture(double eps, double alpha,
                                                double beta,
                                                uint64_t seed = 0);

// Private = base. Far moves e^{-A} of database 0's mass onto the last
// outcome, which database 1 never produces, so it is not pDP at any eps.
// Requires base to be eps-pDP with no mass on the last outcome.
absl::StatusOr<FixturePair> MeanSideInfoFixture(double eps, double alpha,
                                                double a,
                                                const TruthPair& base,
                                                uint64_t seed = 0);

// Builds a fixture by name from a params object, e.g.
// ("adp_twopoint", {"eps": 0.1, "delta": 0.05, "alpha": 0.1}).
absl::StatusOr<FixturePair> FixtureFromJson(const std::string& name,
                                            const nlohmann::json& params,
                                            uint64_t seed = 0);

struct TightPerturbation {
  DiscreteDistribution p0;
  DiscreteDistribution p1;
  // Ordering in which the increase is realised: 0 for (p0, p1), 1 for
  // (p1, p0).
  int direction = 0;
  // 1: mass alpha moved onto the violating event of the dominant side;
  // 2: mass alpha / e^eps moved off it on the other side.
  int branch = 1;
  double delta_before = 0.0;
  double delta_after = 0.0;  // directional, in `direction`
};

// A perturbation of (p0, p1) with TV at most alpha per database raising
// delta_eps by exactly alpha. Requires delta_eps > 0 and
// alpha <= (1 - delta_eps) / (1 + e^eps).
absl::StatusOr<TightPerturbation> TvTightPerturbation(
    const DiscreteDistribution& p0, const DiscreteDistribution& p1, double eps,
    double alpha);

// A random distribution at TV distance at most alpha from p: a random amount
// t <= alpha of mass is taken from random outcomes and added to others.
DiscreteDistribution RandomTvPerturbation(const DiscreteDistribution& p,
                                          double alpha, Rng& rng);

using OracleTester =
    std::function<absl::StatusOr<TestOutcome>(TwoDatabaseOracle&, Rng&)>;

// Decides which database of `mech` produced `unknown_samples` (r samples):
// draws r reference samples from database 0 and runs the tester on the pair
// (unknown, reference). Returns 0 on ACCEPT and 1 on REJECT. Fails if the
// tester asks for more than r samples from either side.
absl::StatusOr<int> Distinguish(const OracleTester& tester,
                                TwoDatabaseOracle& mech,
                                const Histogram& unknown_samples, int64_t r,
                                Rng& rng);

struct HardnessDemoResult {
  int trials = 0;
  int64_t budget = 0;
  double a = 0.0;
  // Trials with psi absent from the database-1 samples of both instances.
  int absent_differing = 0;
  // Trials with psi absent from all four sample sets.
  int absent_all = 0;
};

// Draws `budget` samples per database from both instances of
// PdpUnverifiableFixture(eps, alpha, ln(100 budget)) and counts psi.
absl::StatusOr<HardnessDemoResult> RunHardnessDemo(double eps, double alpha,
                                                   int64_t budget, int trials,
                                                   uint64_t seed);

}  // namespace dpaudit

#endif  // DPAUDIT_FIXTURES_H_
