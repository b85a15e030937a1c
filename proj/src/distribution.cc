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

#include "dpaudit/distribution.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "absl/strings/str_cat.h"

namespace dpaudit {
namespace {

absl::Status CheckSameSize(const DiscreteDistribution& p,
                           const DiscreteDistribution& q) {
  if (p.size() != q.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("distributions have different universe sizes: ",
                     p.size(), " vs ", q.size()));
  }
  return absl::OkStatus();
}

absl::Status CheckEpsilon(double eps) {
  if (!(eps >= 0.0) || std::isinf(eps)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be finite and non-negative, got ", eps));
  }
  return absl::OkStatus();
}

absl::Status CheckEnumerable(int n) {
  if (n > kMaxEnumerationSize) {
    return absl::InvalidArgumentError(
        absl::StrCat("event enumeration needs n <= ", kMaxEnumerationSize,
                     ", got ", n));
  }
  return absl::OkStatus();
}

double EventMaxExcess(const DiscreteDistribution& p,
                      const DiscreteDistribution& q, double scale) {
  const unsigned long events = 1ul << p.size();
  double best = 0.0;  // the empty event
  for (unsigned long mask = 1; mask < events; ++mask) {
    best = std::max(best, p.EventMass(mask) - scale * q.EventMass(mask));
  }
  return best;
}

}  // namespace

absl::StatusOr<DiscreteDistribution> DiscreteDistribution::FromProbabilities(
    std::vector<double> probs) {
  if (probs.empty()) {
    return absl::InvalidArgumentError("distribution must have n >= 1");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || std::isinf(p)) {
      return absl::InvalidArgumentError(
          absl::StrCat("probabilities must be finite and non-negative, got ",
                       p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("probabilities sum to ", total, ", not 1"));
  }
  return DiscreteDistribution(std::move(probs));
}

DiscreteDistribution DiscreteDistribution::Uniform(int n) {
  assert(n >= 1);
  return DiscreteDistribution(std::vector<double>(n, 1.0 / n));
}

DiscreteDistribution DiscreteDistribution::PointMass(int n, int outcome) {
  assert(n >= 1 && outcome >= 0 && outcome < n);
  std::vector<double> probs(n, 0.0);
  probs[outcome] = 1.0;
  return DiscreteDistribution(std::move(probs));
}

double DiscreteDistribution::EventMass(unsigned long mask) const {
  double mass = 0.0;
  for (int i = 0; i < size(); ++i) {
    if (mask & (1ul << i)) mass += probs_[i];
  }
  return mass;
}

absl::StatusOr<DiscreteDistribution> MakeDistribution(
    std::span<const double> weights) {
  if (weights.empty()) {
    return absl::InvalidArgumentError("weights must be non-empty");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || std::isinf(w)) {
      return absl::InvalidArgumentError(
          absl::StrCat("weights must be finite and non-negative, got ", w));
    }
    total += w;
  }
  if (total <= 0.0) {
    return absl::InvalidArgumentError("weights sum to zero");
  }
  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) p /= total;
  return DiscreteDistribution::FromProbabilities(std::move(probs));
}

absl::StatusOr<double> TvDistance(const DiscreteDistribution& p,
                                  const DiscreteDistribution& q) {
  if (auto s = CheckSameSize(p, q); !s.ok()) return s;
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * sum);
}

absl::StatusOr<ExtendedReal> KlDivergence(const DiscreteDistribution& p,
                                          const DiscreteDistribution& q) {
  if (auto s = CheckSameSize(p, q); !s.ok()) return s;
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return ExtendedReal::Infinity();
    sum += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can push an exact zero slightly negative.
  return ExtendedReal(std::max(0.0, sum));
}

absl::StatusOr<ExtendedReal> MaxDivergence(const DiscreteDistribution& p,
                                           const DiscreteDistribution& q) {
  if (auto s = CheckSameSize(p, q); !s.ok()) return s;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return ExtendedReal::Infinity();
    best = std::max(best, std::log(p[i] / q[i]));
  }
  // Some p_i > 0 always exists, and then some ratio is >= 1.
  return ExtendedReal(std::max(0.0, best));
}

absl::StatusOr<ExtendedReal> ExactPdpEpsilon(const DiscreteDistribution& p,
                                             const DiscreteDistribution& q) {
  auto forward = MaxDivergence(p, q);
  if (!forward.ok()) return forward.status();
  auto backward = MaxDivergence(q, p);
  if (!backward.ok()) return backward.status();
  return std::max(*forward, *backward);
}

absl::StatusOr<double> DirectionalDelta(const DiscreteDistribution& p,
                                        const DiscreteDistribution& q,
                                        double eps) {
  if (auto s = CheckSameSize(p, q); !s.ok()) return s;
  if (auto s = CheckEpsilon(eps); !s.ok()) return s;
  const double scale = std::exp(eps);
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) sum += std::max(0.0, p[i] - scale * q[i]);
  return std::min(1.0, sum);
}

absl::StatusOr<double> DeltaAtEpsilon(const DiscreteDistribution& p,
                                      const DiscreteDistribution& q,
                                      double eps) {
  auto forward = DirectionalDelta(p, q, eps);
  if (!forward.ok()) return forward.status();
  auto backward = DirectionalDelta(q, p, eps);
  if (!backward.ok()) return backward.status();
  return std::max(*forward, *backward);
}

absl::StatusOr<ExtendedReal> ApproxMaxDivergenceBruteForce(
    const DiscreteDistribution& p, const DiscreteDistribution& q,
    double delta) {
  if (auto s = CheckSameSize(p, q); !s.ok()) return s;
  if (auto s = CheckEnumerable(p.size()); !s.ok()) return s;
  const unsigned long events = 1ul << p.size();
  double best = -std::numeric_limits<double>::infinity();
  bool qualified = false;
  for (unsigned long mask = 0; mask < events; ++mask) {
    const double pe = p.EventMass(mask);
    if (pe < delta) continue;
    qualified = true;
    const double excess = pe - delta;
    const double qe = q.EventMass(mask);
    if (qe == 0.0) {
      if (excess > 0.0) return ExtendedReal::Infinity();
      continue;  // 0/0
    }
    if (excess > 0.0) best = std::max(best, std::log(excess / qe));
  }
  if (!qualified) {
    return absl::InvalidArgumentError(
        absl::StrCat("no event has probability >= ", delta));
  }
  if (std::isinf(best)) {
    return absl::InvalidArgumentError(
        "every qualifying event has zero excess mass; supremum is -infinity");
  }
  return ExtendedReal(best);
}

absl::StatusOr<double> BruteForceDelta(const DiscreteDistribution& p,
                                       const DiscreteDistribution& q,
                                       double eps) {
  if (auto s = CheckSameSize(p, q); !s.ok()) return s;
  if (auto s = CheckEnumerable(p.size()); !s.ok()) return s;
  if (auto s = CheckEpsilon(eps); !s.ok()) return s;
  const double scale = std::exp(eps);
  return std::max(EventMaxExcess(p, q, scale), EventMaxExcess(q, p, scale));
}

absl::StatusOr<double> MinMass(std::span<const DiscreteDistribution> dists) {
  if (dists.empty()) {
    return absl::InvalidArgumentError("min_mass of an empty collection");
  }
  double lowest = 1.0;
  for (const auto& d : dists) {
    for (double p : d.probs()) lowest = std::min(lowest, p);
  }
  return lowest;
}

nlohmann::json ToJson(const DiscreteDistribution& dist) {
  return {{"n", dist.size()},
          {"probs", std::vector<double>(dist.probs().begin(),
                                        dist.probs().end())}};
}

absl::StatusOr<DiscreteDistribution> DistributionFromJson(
    const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("probs") ||
      !json["probs"].is_array()) {
    return absl::InvalidArgumentError(
        "distribution JSON must be an object with a \"probs\" array");
  }
  std::vector<double> probs;
  for (const auto& v : json["probs"]) {
    if (!v.is_number()) {
      return absl::InvalidArgumentError("\"probs\" entries must be numbers");
    }
    probs.push_back(v.get<double>());
  }
  if (json.contains("n") &&
      (!json["n"].is_number_integer() ||
       json["n"].get<long long>() != static_cast<long long>(probs.size()))) {
    return absl::InvalidArgumentError(
        absl::StrCat("\"n\" does not match the length of \"probs\" (",
                     probs.size(), ")"));
  }
  return DiscreteDistribution::FromProbabilities(std::move(probs));
}

}  // namespace dpaudit
