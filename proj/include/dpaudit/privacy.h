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

// Privacy notions, their parameters, and the distance of a two-database pair
// from a claimed parameter set.

#ifndef DPAUDIT_PRIVACY_H_
#define DPAUDIT_PRIVACY_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

enum class PrivacyNotion {
  kPure,          // pDP: epsilon
  kApprox,        // aDP: (epsilon, delta)
  kRandomPure,    // RpDP: (epsilon, gamma)
  kRandomApprox,  // RaDP: (epsilon, delta, gamma)
};

std::string_view NotionName(PrivacyNotion notion);
absl::StatusOr<PrivacyNotion> ParseNotion(std::string_view name);

// Parameters not used by `notion` must be zero. `penalty_weight` trades
// epsilon (or delta_eps) deviation against gamma deviation in the random
// notions' metric min{|eps - eps'|, w |gamma - gamma'|}.
struct PrivacyParams {
  PrivacyNotion notion = PrivacyNotion::kPure;
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double penalty_weight = 1.0;

  static PrivacyParams Pure(double epsilon);
  static PrivacyParams Approx(double epsilon, double delta);
  static PrivacyParams RandomPure(double epsilon, double gamma,
                                  double penalty_weight);
  static PrivacyParams RandomApprox(double epsilon, double delta, double gamma,
                                    double penalty_weight);

  absl::Status Validate() const;

  friend bool operator==(const PrivacyParams&, const PrivacyParams&) = default;
};

nlohmann::json ToJson(const PrivacyParams& params);
absl::StatusOr<PrivacyParams> PrivacyParamsFromJson(const nlohmann::json& json);

// How far the pair (p0, p1) is from meeting a pDP or aDP claim, in the
// notion's metric: max(0, eps' - eps) for pDP, max(0, delta'_eps - delta) for
// aDP with delta' measured at the claimed epsilon. Zero iff the claim holds.
// Infinite for a pDP claim when some ratio is unbounded.
absl::StatusOr<ExtendedReal> DistanceFromClaim(const DiscreteDistribution& p0,
                                               const DiscreteDistribution& p1,
                                               const PrivacyParams& claim);

}  // namespace dpaudit

#endif  // DPAUDIT_PRIVACY_H_
