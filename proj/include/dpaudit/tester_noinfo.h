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

// The no-information aDP tester: Poissonize both databases, estimate
// delta_eps by the positive part of the scaled count differences, and
// threshold at delta + alpha.

#ifndef DPAUDIT_TESTER_NOINFO_H_
#define DPAUDIT_TESTER_NOINFO_H_

#include <cstdint>
#include <optional>
#include <span>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/test_outcome.h"

namespace dpaudit {

// max{4n(1 + e^{2 eps})^2 / alpha^2, 12(1 + e^{2 eps}) / alpha^2}: the rate
// at which Chebyshev bounds both error probabilities by 1/3.
double AdpNiRate(int n, double eps, double alpha);

struct AdpNiConfig {
  int n = 0;
  double eps = 0.0;
  double delta = 0.0;
  // Proximity: the tester separates delta_eps <= delta from
  // delta_eps >= delta + 2 alpha.
  double alpha = 0.0;
  // Derived through AdpNiRate when absent.
  std::optional<double> lambda_rate;

  // Test both orderings and take the larger statistic. When false only the
  // 0 -> 1 direction (x - e^eps y) is tested.
  bool both_directions = true;
  // One Poisson draw r shared by both databases; otherwise one per database.
  bool shared_poisson_draw = true;
  // When false, draw exactly ceil(rate) samples per database instead of a
  // Poisson number; query counts are then deterministic.
  bool poissonize = true;

  double rate() const;
  absl::Status Validate() const;
};

struct PoissonizedSample {
  Histogram counts;
  int64_t r = 0;
};

// r ~ Poisson(rate), then r draws from database `db`. Each count is then
// Poisson(rate * p_i), independently across outcomes.
absl::StatusOr<PoissonizedSample> PoissonizedHistogram(TwoDatabaseOracle& mech,
                                                       int db, double rate,
                                                       Rng& rng);

// z = sum_i max(0, (x_i - e^eps y_i) / r).
absl::StatusOr<double> AdpStatistic(std::span<const int64_t> x,
                                    std::span<const int64_t> y, int64_t r,
                                    double eps);
// Per-database sample sizes: sum_i max(0, x_i / rx - e^eps y_i / ry).
absl::StatusOr<double> AdpStatistic(std::span<const int64_t> x, int64_t rx,
                                    std::span<const int64_t> y, int64_t ry,
                                    double eps);

// ACCEPT iff statistic < delta + alpha. Draws r = 0 are redrawn and counted
// in diagnostics["poisson_retries"].
absl::StatusOr<TestOutcome> AdpTestNoInfo(TwoDatabaseOracle& mech,
                                          const AdpNiConfig& cfg, Rng& rng);

}  // namespace dpaudit

#endif  // DPAUDIT_TESTER_NOINFO_H_
