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

// Full-information testers. The verifier holds claimed output distributions
// (Q0, Q1) and black-box access to the mechanism. A wrong claim is a
// rejection.

#ifndef DPAUDIT_TESTER_FULLINFO_H_
#define DPAUDIT_TESTER_FULLINFO_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/test_outcome.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

// Bumped whenever IdentityStatistic changes; part of every calibration key.
inline constexpr int kIdentityStatisticVersion = 1;

// Poisson budget is ceil(c * sqrt(n) / alpha^2). The default c is the
// smallest value on a doubling grid for which the calibrated tester met the
// 2/3 contract (null accept and balanced-perturbation reject, each within
// 0.02) on uniform and two-point nulls for n in {2, 4, ..., 1024} and alpha
// in {0.1, 0.2, 0.3}. Reproduce with
// `dp-audit calibrate --budget-constant --seed 7`.
inline constexpr double kIdentityBudgetConstant = 1.0;

struct IdentityTesterConfig {
  double alpha = 0.1;  // TV proximity
  double confidence = 2.0 / 3.0;
  std::optional<int64_t> sample_budget;  // Poisson rate; derived if absent
  std::optional<double> threshold;       // set by calibration
  double budget_constant = kIdentityBudgetConstant;

  int64_t budget(int n) const;
  absl::Status Validate() const;
};

// sum_{q_i > 0} ((X_i - r q_i)^2 - X_i) / (r q_i) with r the Poisson rate.
// Unbiased for zero under the null, and r * chi^2(Q' || Q) in expectation
// under Q'. +infinity when X_i > 0 on an outcome with q_i = 0.
double IdentityStatistic(const DiscreteDistribution& q,
                         std::span<const int64_t> counts, double rate);

// Runs the statistic `trials` times on Poissonized samples drawn from Q
// itself (no mechanism queries) and returns the smallest threshold whose
// strict-below acceptance on those trials is at least
// cfg.confidence + 3 sqrt(confidence (1 - confidence) / trials).
absl::StatusOr<double> CalibrateIdentityThreshold(
    const DiscreteDistribution& q, const IdentityTesterConfig& cfg, int trials,
    Rng& rng);

// ACCEPT iff statistic < cfg.threshold. `samples` must be a Poissonized
// histogram at rate cfg.budget(n).
absl::StatusOr<TestOutcome> IdentityTest(const DiscreteDistribution& q,
                                         std::span<const int64_t> samples,
                                         const IdentityTesterConfig& cfg);

// Majority repetitions lifting a 2/3-correct test to `target` correctness:
// ceil(18 ln(1 / (1 - target))), from the Hoeffding bound exp(-k/18).
int MajorityRepetitions(double target);

// k Poissonized identity tests against database `db`; ACCEPT iff a strict
// majority accept.
absl::StatusOr<TestOutcome> MajorityIdentityTest(
    const DiscreteDistribution& q, TwoDatabaseOracle& mech, int db,
    const IdentityTesterConfig& cfg, int repetitions, Rng& rng);

// Thresholds keyed by (null distribution, alpha, confidence, budget,
// statistic version). Safe for concurrent use.
class CalibrationCache {
 public:
  CalibrationCache() = default;
  CalibrationCache(const CalibrationCache& other);
  CalibrationCache& operator=(const CalibrationCache& other);

  std::optional<double> Lookup(const DiscreteDistribution& q,
                               const IdentityTesterConfig& cfg) const;
  void Insert(const DiscreteDistribution& q, const IdentityTesterConfig& cfg,
              double threshold);
  // Calibrates on a miss with a generator derived from `seed` and the key.
  // Results are independent of lookup order.
  absl::StatusOr<double> GetOrCalibrate(const DiscreteDistribution& q,
                                        const IdentityTesterConfig& cfg,
                                        int trials, uint64_t seed);
  size_t size() const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<CalibrationCache> FromJson(const nlohmann::json& json);

 private:
  static nlohmann::json KeyJson(const DiscreteDistribution& q,
                                const IdentityTesterConfig& cfg);

  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> entries_;
};

struct AdpFiConfig {
  double eps = 0.0;
  double delta = 0.0;
  double alpha = 0.1;  // identity-tester TV proximity
  IdentityTesterConfig identity;  // alpha is overwritten with `alpha`
  int calibration_trials = 1000;
  // Majority repetitions per database; MajorityRepetitions(sqrt(2/3)) if
  // absent.
  std::optional<int> repetitions;
  // Optional shared cache; otherwise thresholds are calibrated per call.
  CalibrationCache* cache = nullptr;
  uint64_t calibration_seed = 0;
};

// Exact check of the claim first (no queries); then identity tests of P0
// against Q0 and P1 against Q1, each majority-amplified. ACCEPT iff the claim
// is (eps, delta)-aDP and both identity tests accept.
absl::StatusOr<TestOutcome> AdpTestFullInfo(TwoDatabaseOracle& mech,
                                            const SideInfo& side,
                                            const AdpFiConfig& cfg, Rng& rng);
absl::StatusOr<TestOutcome> AdpTestFullInfo(TwoDatabaseOracle& mech,
                                            const SideInfo& side, double eps,
                                            double delta, double alpha,
                                            Rng& rng);

// ln n / (alpha^2 beta^2).
double FiPdpRate(int n, double alpha, double beta);

struct FiPdpConfig {
  double eps = 0.0;
  double alpha = 0.1;
  // Minimum mass of the side information; computed when absent.
  std::optional<double> beta;
  std::optional<double> lambda_rate;
};

// Independent Poissonized draws per database; empirical frequencies
// x_i / r0 and y_i / r1. REJECT if the empirical pDP loss exceeds
// eps + 2 alpha (a zero count makes it infinite); otherwise ACCEPT iff every
// empirical frequency is within a factor e^{+-alpha} of its claimed value.
absl::StatusOr<TestOutcome> PdpTestFullInfo(TwoDatabaseOracle& mech,
                                            const SideInfo& side,
                                            const FiPdpConfig& cfg, Rng& rng);

// Canonical calibration grid.
enum class NullKind { kUniform, kTwoPoint };
std::string_view NullKindName(NullKind kind);
// Uniform on [n], or the two-point null: (0.7, 0.3) for n = 2 and
// (1/2, 1/4, 1/(4(n-2)), ...) for n >= 3.
DiscreteDistribution CanonicalNull(NullKind kind, int n);

// The alternative at TV distance exactly alpha that moves mass
// proportionally between two halves of (nearly) equal mass:
// q_i (1 + alpha / M+) on one half and q_i (1 - alpha / M-) on the other.
absl::StatusOr<DiscreteDistribution> BalancedPerturbation(
    const DiscreteDistribution& q, double alpha);

struct ContractPoint {
  NullKind kind;
  int n = 0;
  double alpha = 0.0;
  int64_t budget = 0;
  double threshold = 0.0;
  double null_accept_rate = 0.0;
  double far_reject_rate = 0.0;
};

// Calibrates and then measures the single-run contract on fresh trials.
absl::StatusOr<ContractPoint> MeasureIdentityContract(
    NullKind kind, int n, const IdentityTesterConfig& cfg,
    int calibration_trials, int evaluation_trials, uint64_t seed);

// Smallest constant on {0.25, 0.5, 1, 2, ...} up to `max_constant` whose
// measured rates all reach cfg.confidence - slack on the grid.
absl::StatusOr<double> CalibrateBudgetConstant(
    std::span<const int> sizes, std::span<const double> alphas,
    double confidence, double slack, int calibration_trials,
    int evaluation_trials, double max_constant, uint64_t seed);

}  // namespace dpaudit

#endif  // DPAUDIT_TESTER_FULLINFO_H_
