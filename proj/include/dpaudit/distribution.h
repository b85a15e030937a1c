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

// Discrete distributions over a finite outcome universe [n] and the exact
// divergences between them. Outcomes are indexed 0..n-1.

#ifndef DPAUDIT_DISTRIBUTION_H_
#define DPAUDIT_DISTRIBUTION_H_

#include <cassert>
#include <cmath>
#include <compare>
#include <limits>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

// Distributions must sum to one within this tolerance.
inline constexpr double kNormalizationTolerance = 1e-9;

// Largest universe for which event enumeration (2^n subsets) is allowed.
inline constexpr int kMaxEnumerationSize = 20;

// A real value or +infinity. Divergences are infinite when a ratio's
// denominator vanishes while its numerator does not.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  explicit ExtendedReal(double value) : value_(value) {
    assert(!std::isnan(value) && value != -std::numeric_limits<double>::infinity());
  }

  static ExtendedReal Infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  bool is_infinite() const { return std::isinf(value_); }
  bool is_finite() const { return !is_infinite(); }
  // +inf when infinite.
  double value() const { return value_; }

  friend bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.value_ == b.value_;
  }
  friend std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
};

class DiscreteDistribution {
 public:
  // Validates without renormalizing, so stored values are bit-identical to
  // the input. Entries must be non-negative and sum to 1 within
  // kNormalizationTolerance.
  static absl::StatusOr<DiscreteDistribution> FromProbabilities(
      std::vector<double> probs);

  static DiscreteDistribution Uniform(int n);
  static DiscreteDistribution PointMass(int n, int outcome);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  // Mass of the event whose members are the set bits of `mask`.
  double EventMass(unsigned long mask) const;

  friend bool operator==(const DiscreteDistribution&,
                         const DiscreteDistribution&) = default;

 private:
  explicit DiscreteDistribution(std::vector<double> probs)
      : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

// Normalizes non-negative weights with a positive sum.
absl::StatusOr<DiscreteDistribution> MakeDistribution(
    std::span<const double> weights);

// (1/2) sum_i |p_i - q_i|.
absl::StatusOr<double> TvDistance(const DiscreteDistribution& p,
                                  const DiscreteDistribution& q);

// sum_{p_i > 0} p_i ln(p_i / q_i); infinite on support mismatch.
absl::StatusOr<ExtendedReal> KlDivergence(const DiscreteDistribution& p,
                                          const DiscreteDistribution& q);

// sup_E ln P(E)/Q(E), attained pointwise: max over p_i > 0 of ln(p_i/q_i).
// 0/0 contributes nothing; x/0 with x > 0 is +infinity.
absl::StatusOr<ExtendedReal> MaxDivergence(const DiscreteDistribution& p,
                                           const DiscreteDistribution& q);

// Smallest eps such that (p, q) is eps-pure DP: max divergence over both
// orderings.
absl::StatusOr<ExtendedReal> ExactPdpEpsilon(const DiscreteDistribution& p,
                                             const DiscreteDistribution& q);

// sum_i max(0, p_i - e^eps q_i) = max_E P(E) - e^eps Q(E), for the single
// ordering (p, q).
absl::StatusOr<double> DirectionalDelta(const DiscreteDistribution& p,
                                        const DiscreteDistribution& q,
                                        double eps);

// delta_eps of the pair: DirectionalDelta maximized over both orderings.
// (p, q) is (eps, delta)-approximate DP iff DeltaAtEpsilon <= delta.
absl::StatusOr<double> DeltaAtEpsilon(const DiscreteDistribution& p,
                                      const DiscreteDistribution& q,
                                      double eps);

// sup over events E with P(E) >= delta of ln((P(E) - delta) / Q(E)), by
// enumerating all 2^n events. Fails when n > kMaxEnumerationSize or when no
// event has a finite or infinite (not -inf) value.
absl::StatusOr<ExtendedReal> ApproxMaxDivergenceBruteForce(
    const DiscreteDistribution& p, const DiscreteDistribution& q,
    double delta);

// max over all events and both orderings of P(E) - e^eps Q(E), floored at 0.
// Independent of DeltaAtEpsilon's pointwise route.
absl::StatusOr<double> BruteForceDelta(const DiscreteDistribution& p,
                                       const DiscreteDistribution& q,
                                       double eps);

// Smallest entry over the whole collection.
absl::StatusOr<double> MinMass(std::span<const DiscreteDistribution> dists);

// {"n": int, "probs": [...]}. Doubles are written in shortest round-trip form
// (up to 17 significant digits) and read back bit-exactly.
nlohmann::json ToJson(const DiscreteDistribution& dist);
absl::StatusOr<DiscreteDistribution> DistributionFromJson(
    const nlohmann::json& json);

}  // namespace dpaudit

#endif  // DPAUDIT_DISTRIBUTION_H_
