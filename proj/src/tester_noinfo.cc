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

#include "dpaudit/tester_noinfo.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"

namespace dpaudit {
namespace {

// Cap on r = 0 redraws; only reachable with a tiny explicit rate.
constexpr int kMaxPoissonRetries = 10000;

struct PositiveDraw {
  int64_t r = 0;
  int retries = 0;
};

absl::StatusOr<PositiveDraw> DrawPositivePoisson(double rate, Rng& rng) {
  std::poisson_distribution<int64_t> poisson(rate);
  PositiveDraw draw;
  for (; draw.retries <= kMaxPoissonRetries; ++draw.retries) {
    draw.r = poisson(rng);
    if (draw.r > 0) return draw;
  }
  return absl::FailedPreconditionError(absl::StrCat(
      "Poisson(", rate, ") kept drawing r = 0; the rate is too small"));
}

}  // namespace

double AdpNiRate(int n, double eps, double alpha) {
  const double spread = 1.0 + std::exp(2.0 * eps);
  const double alpha2 = alpha * alpha;
  return std::max(4.0 * n * spread * spread / alpha2, 12.0 * spread / alpha2);
}

double AdpNiConfig::rate() const {
  return lambda_rate.has_value() ? *lambda_rate : AdpNiRate(n, eps, alpha);
}

absl::Status AdpNiConfig::Validate() const {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  if (!(eps >= 0.0) || std::isinf(eps)) {
    return absl::InvalidArgumentError("eps must be finite and >= 0");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1]");
  }
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (lambda_rate.has_value() && !(*lambda_rate > 0.0)) {
    return absl::InvalidArgumentError("lambda_rate must be > 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<PoissonizedSample> PoissonizedHistogram(TwoDatabaseOracle& mech,
                                                       int db, double rate,
                                                       Rng& rng) {
  if (!(rate > 0.0) || std::isinf(rate)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Poisson rate must be positive and finite, got ", rate));
  }
  PoissonizedSample sample;
  sample.r = std::poisson_distribution<int64_t>(rate)(rng);
  auto counts = mech.Draw(db, sample.r);
  if (!counts.ok()) return counts.status();
  sample.counts = *std::move(counts);
  return sample;
}

absl::StatusOr<double> AdpStatistic(std::span<const int64_t> x, int64_t rx,
                                    std::span<const int64_t> y, int64_t ry,
                                    double eps) {
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError("count vectors differ in length");
  }
  if (rx <= 0 || ry <= 0) {
    return absl::InvalidArgumentError("sample sizes must be positive");
  }
  const double scale = std::exp(eps);
  double z = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    z += std::max(0.0, static_cast<double>(x[i]) / rx -
                           scale * static_cast<double>(y[i]) / ry);
  }
  return z;
}

absl::StatusOr<double> AdpStatistic(std::span<const int64_t> x,
                                    std::span<const int64_t> y, int64_t r,
                                    double eps) {
  return AdpStatistic(x, r, y, r, eps);
}

absl::StatusOr<TestOutcome> AdpTestNoInfo(TwoDatabaseOracle& mech,
                                          const AdpNiConfig& cfg, Rng& rng) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  if (mech.universe_size() != cfg.n) {
    return absl::InvalidArgumentError(
        absl::StrCat("mechanism universe has ", mech.universe_size(),
                     " outcomes but the tester was configured for n = ",
                     cfg.n));
  }
  const double rate = cfg.rate();
  const auto before = mech.queries();

  int64_t r0 = 0, r1 = 0;
  int retries = 0;
  if (!cfg.poissonize) {
    r0 = r1 = static_cast<int64_t>(std::ceil(rate));
  } else if (cfg.shared_poisson_draw) {
    auto d = DrawPositivePoisson(rate, rng);
    if (!d.ok()) return d.status();
    r0 = r1 = d->r;
    retries = d->retries;
  } else {
    auto d0 = DrawPositivePoisson(rate, rng);
    if (!d0.ok()) return d0.status();
    auto d1 = DrawPositivePoisson(rate, rng);
    if (!d1.ok()) return d1.status();
    r0 = d0->r;
    r1 = d1->r;
    retries = d0->retries + d1->retries;
  }

  auto x = mech.Draw(0, r0);
  if (!x.ok()) return x.status();
  auto y = mech.Draw(1, r1);
  if (!y.ok()) return y.status();

  auto forward = AdpStatistic(*x, r0, *y, r1, cfg.eps);
  if (!forward.ok()) return forward.status();
  double statistic = *forward;
  TestOutcome outcome;
  outcome.diagnostics["z_forward"] = *forward;
  if (cfg.both_directions) {
    auto backward = AdpStatistic(*y, r1, *x, r0, cfg.eps);
    if (!backward.ok()) return backward.status();
    outcome.diagnostics["z_backward"] = *backward;
    statistic = std::max(statistic, *backward);
  }

  outcome.statistic = statistic;
  outcome.threshold = cfg.delta + cfg.alpha;
  outcome.verdict =
      statistic < outcome.threshold ? Verdict::kAccept : Verdict::kReject;
  const auto after = mech.queries();
  outcome.queries_used = {after[0] - before[0], after[1] - before[1]};
  outcome.diagnostics["rule"] = "ACCEPT iff statistic < threshold";
  outcome.diagnostics["rate"] = rate;
  outcome.diagnostics["r0"] = r0;
  outcome.diagnostics["r1"] = r1;
  outcome.diagnostics["poisson_retries"] = retries;
  return outcome;
}

}  // namespace dpaudit
