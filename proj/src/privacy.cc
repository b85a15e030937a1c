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

#include "dpaudit/privacy.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace dpaudit {

std::string_view NotionName(PrivacyNotion notion) {
  switch (notion) {
    case PrivacyNotion::kPure:
      return "pdp";
    case PrivacyNotion::kApprox:
      return "adp";
    case PrivacyNotion::kRandomPure:
      return "rpdp";
    case PrivacyNotion::kRandomApprox:
      return "radp";
  }
  return "unknown";
}

absl::StatusOr<PrivacyNotion> ParseNotion(std::string_view name) {
  for (auto notion : {PrivacyNotion::kPure, PrivacyNotion::kApprox,
                      PrivacyNotion::kRandomPure,
                      PrivacyNotion::kRandomApprox}) {
    if (NotionName(notion) == name) return notion;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown privacy notion \"", std::string(name),
                   "\"; expected pdp, adp, rpdp or radp"));
}

PrivacyParams PrivacyParams::Pure(double epsilon) {
  return {PrivacyNotion::kPure, epsilon, 0.0, 0.0, 1.0};
}

PrivacyParams PrivacyParams::Approx(double epsilon, double delta) {
  return {PrivacyNotion::kApprox, epsilon, delta, 0.0, 1.0};
}

PrivacyParams PrivacyParams::RandomPure(double epsilon, double gamma,
                                        double penalty_weight) {
  return {PrivacyNotion::kRandomPure, epsilon, 0.0, gamma, penalty_weight};
}

PrivacyParams PrivacyParams::RandomApprox(double epsilon, double delta,
                                          double gamma,
                                          double penalty_weight) {
  return {PrivacyNotion::kRandomApprox, epsilon, delta, gamma,
          penalty_weight};
}

absl::Status PrivacyParams::Validate() const {
  if (!(epsilon >= 0.0) || std::isinf(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be finite and >= 0");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1]");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in [0, 1]");
  }
  if (!(penalty_weight > 0.0) || std::isinf(penalty_weight)) {
    return absl::InvalidArgumentError("penalty_weight must be positive");
  }
  const bool uses_delta = notion == PrivacyNotion::kApprox ||
                          notion == PrivacyNotion::kRandomApprox;
  const bool uses_gamma = notion == PrivacyNotion::kRandomPure ||
                          notion == PrivacyNotion::kRandomApprox;
  if (!uses_delta && delta != 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(NotionName(notion)), " does not use delta; it must be 0"));
  }
  if (!uses_gamma && gamma != 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(NotionName(notion)), " does not use gamma; it must be 0"));
  }
  return absl::OkStatus();
}

nlohmann::json ToJson(const PrivacyParams& params) {
  return {{"notion", std::string(NotionName(params.notion))},
          {"epsilon", params.epsilon},
          {"delta", params.delta},
          {"gamma", params.gamma},
          {"penalty_weight", params.penalty_weight}};
}

absl::StatusOr<PrivacyParams> PrivacyParamsFromJson(const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("notion")) {
    return absl::InvalidArgumentError("privacy params need a \"notion\"");
  }
  auto notion = ParseNotion(json["notion"].get<std::string>());
  if (!notion.ok()) return notion.status();
  PrivacyParams params;
  params.notion = *notion;
  params.epsilon = json.value("epsilon", 0.0);
  params.delta = json.value("delta", 0.0);
  params.gamma = json.value("gamma", 0.0);
  params.penalty_weight = json.value("penalty_weight", 1.0);
  if (auto s = params.Validate(); !s.ok()) return s;
  return params;
}

absl::StatusOr<ExtendedReal> DistanceFromClaim(const DiscreteDistribution& p0,
                                               const DiscreteDistribution& p1,
                                               const PrivacyParams& claim) {
  if (auto s = claim.Validate(); !s.ok()) return s;
  switch (claim.notion) {
    case PrivacyNotion::kPure: {
      auto eps = ExactPdpEpsilon(p0, p1);
      if (!eps.ok()) return eps.status();
      if (eps->is_infinite()) return ExtendedReal::Infinity();
      return ExtendedReal(std::max(0.0, eps->value() - claim.epsilon));
    }
    case PrivacyNotion::kApprox: {
      auto delta = DeltaAtEpsilon(p0, p1, claim.epsilon);
      if (!delta.ok()) return delta.status();
      return ExtendedReal(std::max(0.0, *delta - claim.delta));
    }
    case PrivacyNotion::kRandomPure:
    case PrivacyNotion::kRandomApprox:
      break;
  }
  return absl::InvalidArgumentError(
      "random notions are properties of a mechanism family, not of one pair");
}

}  // namespace dpaudit
