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

#include "dpaudit/mechanism.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "absl/strings/str_cat.h"

namespace dpaudit {
namespace {

absl::Status CheckDatabase(int db) {
  if (db != 0 && db != 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("database index must be 0 or 1, got ", db));
  }
  return absl::OkStatus();
}

absl::Status CheckCount(int64_t count) {
  if (count < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("sample count must be >= 0, got ", count));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> RequireNumber(const nlohmann::json& config,
                                     const char* key) {
  if (!config.contains(key) || !config[key].is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat("mechanism config needs numeric \"", key, "\""));
  }
  return config[key].get<double>();
}

absl::StatusOr<int> RequireInt(const nlohmann::json& config, const char* key) {
  if (!config.contains(key) || !config[key].is_number_integer()) {
    return absl::InvalidArgumentError(
        absl::StrCat("mechanism config needs integer \"", key, "\""));
  }
  return config[key].get<int>();
}

}  // namespace

uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path) {
  std::vector<uint32_t> words = {static_cast<uint32_t>(seed),
                                 static_cast<uint32_t>(seed >> 32)};
  for (uint64_t p : path) {
    words.push_back(static_cast<uint32_t>(p));
    words.push_back(static_cast<uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<uint32_t, 2> out;
  seq.generate(out.begin(), out.end());
  return (static_cast<uint64_t>(out[1]) << 32) | out[0];
}

Rng DeriveRng(uint64_t seed, std::initializer_list<uint64_t> path) {
  return Rng(DeriveSeed(seed, path));
}

void Sampler::SampleInto(int64_t count, Rng& rng,
                         std::span<int64_t> histogram) const {
  for (int64_t k = 0; k < count; ++k) ++histogram[Sample(rng)];
}

DistributionSampler::DistributionSampler(DiscreteDistribution dist)
    : dist_(std::move(dist)) {
  cdf_.reserve(dist_.size());
  double running = 0.0;
  for (double p : dist_.probs()) {
    running += p;
    cdf_.push_back(running);
  }
}

int DistributionSampler::Sample(Rng& rng) const {
  const double u =
      std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  int i = static_cast<int>(std::distance(cdf_.begin(), it));
  i = std::min(i, dist_.size() - 1);
  // Never land on a zero-mass outcome through rounding at a CDF plateau.
  while (dist_[i] == 0.0 && i > 0) --i;
  return i;
}

void DistributionSampler::SampleInto(int64_t count, Rng& rng,
                                     std::span<int64_t> histogram) const {
  int64_t remaining = count;
  double remaining_mass = 1.0;
  const int n = dist_.size();
  for (int i = 0; i < n && remaining > 0; ++i) {
    const double p = dist_[i];
    if (p == 0.0) continue;
    if (i == n - 1 || p >= remaining_mass) {
      histogram[i] += remaining;
      return;
    }
    const double conditional = std::clamp(p / remaining_mass, 0.0, 1.0);
    const int64_t k =
        std::binomial_distribution<int64_t>(remaining, conditional)(rng);
    histogram[i] += k;
    remaining -= k;
    remaining_mass -= p;
  }
  if (remaining > 0) {
    // Rounding exhausted the mass early; assign the rest to the last
    // outcome with positive mass.
    for (int i = n - 1; i >= 0; --i) {
      if (dist_[i] > 0.0) {
        histogram[i] += remaining;
        return;
      }
    }
  }
}

Histogram SampleHistogram(const Sampler& sampler, int64_t count, Rng& rng) {
  Histogram h(sampler.universe_size(), 0);
  sampler.SampleInto(count, rng, h);
  return h;
}

MechanismPair::MechanismPair(std::shared_ptr<const Sampler> s0,
                             std::shared_ptr<const Sampler> s1, uint64_t seed,
                             std::optional<TruthPair> truth)
    : samplers_{std::move(s0), std::move(s1)},
      streams_{DeriveRng(seed, {0}), DeriveRng(seed, {1})},
      truth_(std::move(truth)) {
  n_ = samplers_[0]->universe_size();
}

absl::StatusOr<MechanismPair> MechanismPair::FromSamplers(
    std::shared_ptr<const Sampler> sampler0,
    std::shared_ptr<const Sampler> sampler1, uint64_t seed,
    std::optional<TruthPair> truth) {
  if (sampler0 == nullptr || sampler1 == nullptr) {
    return absl::InvalidArgumentError("both samplers are required");
  }
  if (sampler0->universe_size() != sampler1->universe_size()) {
    return absl::InvalidArgumentError(
        "the two databases' samplers have different universe sizes");
  }
  if (truth.has_value() &&
      (truth->p0.size() != sampler0->universe_size() ||
       truth->p1.size() != sampler0->universe_size())) {
    return absl::InvalidArgumentError(
        "ground truth does not match the samplers' universe");
  }
  return MechanismPair(std::move(sampler0), std::move(sampler1), seed,
                       std::move(truth));
}

absl::StatusOr<Histogram> MechanismPair::Draw(int db, int64_t count) {
  if (auto s = CheckDatabase(db); !s.ok()) return s;
  if (auto s = CheckCount(count); !s.ok()) return s;
  Histogram h(n_, 0);
  samplers_[db]->SampleInto(count, streams_[db], h);
  queries_[db] += count;
  return h;
}

MechanismPair MechanismPair::Reseeded(uint64_t seed) const {
  return MechanismPair(samplers_[0], samplers_[1], seed, truth_);
}

absl::StatusOr<SideInfo> SideInfo::Create(DiscreteDistribution q0,
                                          DiscreteDistribution q1) {
  if (q0.size() != q1.size()) {
    return absl::InvalidArgumentError(
        "side information distributions have different universe sizes");
  }
  return SideInfo{std::move(q0), std::move(q1)};
}

nlohmann::json ToJson(const SideInfo& side) {
  return {{"q0", ToJson(side.q0)}, {"q1", ToJson(side.q1)}};
}

absl::StatusOr<SideInfo> SideInfoFromJson(const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("q0") || !json.contains("q1")) {
    return absl::InvalidArgumentError(
        "side information JSON needs \"q0\" and \"q1\"");
  }
  auto q0 = DistributionFromJson(json["q0"]);
  if (!q0.ok()) return q0.status();
  auto q1 = DistributionFromJson(json["q1"]);
  if (!q1.ok()) return q1.status();
  return SideInfo::Create(*std::move(q0), *std::move(q1));
}

absl::StatusOr<MechanismPair> FromDistributions(DiscreteDistribution p0,
                                                DiscreteDistribution p1,
                                                uint64_t seed) {
  if (p0.size() != p1.size()) {
    return absl::InvalidArgumentError(
        "the two databases' distributions have different universe sizes");
  }
  auto s0 = std::make_shared<DistributionSampler>(p0);
  auto s1 = std::make_shared<DistributionSampler>(p1);
  return MechanismPair::FromSamplers(std::move(s0), std::move(s1), seed,
                                     TruthPair{std::move(p0), std::move(p1)});
}

absl::StatusOr<MechanismPair> RandomizedResponse(double flip_prob,
                                                 uint64_t seed) {
  if (!(flip_prob > 0.0 && flip_prob < 0.5)) {
    return absl::InvalidArgumentError(
        absl::StrCat("flip_prob must lie in (0, 0.5), got ", flip_prob));
  }
  const std::vector<double> w0 = {1.0 - flip_prob, flip_prob};
  const std::vector<double> w1 = {flip_prob, 1.0 - flip_prob};
  auto p0 = DiscreteDistribution::FromProbabilities(w0);
  auto p1 = DiscreteDistribution::FromProbabilities(w1);
  if (!p0.ok()) return p0.status();
  if (!p1.ok()) return p1.status();
  return FromDistributions(*std::move(p0), *std::move(p1), seed);
}

absl::StatusOr<MechanismPair> TruncatedGeometric(double eps, int n,
                                                 uint64_t seed) {
  if (n < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("truncated_geometric needs n >= 2, got ", n));
  }
  if (!(eps > 0.0) || std::isinf(eps)) {
    return absl::InvalidArgumentError(
        absl::StrCat("truncated_geometric needs eps > 0, got ", eps));
  }
  const double q = std::exp(-eps);
  auto clamped = [&](int center) {
    // P(K = k) = (1 - q) / (1 + q) q^|k|; P(K <= -m) = P(K >= m) = q^m/(1+q).
    std::vector<double> w(n);
    for (int i = 1; i + 1 < n; ++i) {
      w[i] = (1.0 - q) / (1.0 + q) * std::pow(q, std::abs(i - center));
    }
    w[0] = std::pow(q, center) / (1.0 + q);
    w[n - 1] = std::pow(q, n - 1 - center) / (1.0 + q);
    return MakeDistribution(w);
  };
  const int center0 = (n + 1) / 2 - 1;  // ceil(n/2) in 1-based indexing
  auto p0 = clamped(center0);
  auto p1 = clamped(center0 + 1);
  if (!p0.ok()) return p0.status();
  if (!p1.ok()) return p1.status();
  return FromDistributions(*std::move(p0), *std::move(p1), seed);
}

absl::StatusOr<MechanismPair> LeakyMechanism(double delta, int n,
                                             uint64_t seed) {
  if (n < 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("leaky mechanism needs n >= 3, got ", n));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("leaky mechanism needs delta in (0, 1), got ", delta));
  }
  std::vector<double> w0(n, 0.0), w1(n, 0.0);
  w0[0] = w1[0] = 1.0 - delta;
  w0[1] = delta;
  w1[2] = delta;
  auto p0 = DiscreteDistribution::FromProbabilities(w0);
  auto p1 = DiscreteDistribution::FromProbabilities(w1);
  if (!p0.ok()) return p0.status();
  if (!p1.ok()) return p1.status();
  return FromDistributions(*std::move(p0), *std::move(p1), seed);
}

absl::StatusOr<MechanismPair> MechanismFromJson(const nlohmann::json& config,
                                                uint64_t seed) {
  if (!config.is_object() || !config.contains("mechanism") ||
      !config["mechanism"].is_string()) {
    return absl::InvalidArgumentError(
        "mechanism config needs a string \"mechanism\" field");
  }
  const std::string name = config["mechanism"].get<std::string>();
  if (name == "randomized_response") {
    auto f = RequireNumber(config, "flip_prob");
    if (!f.ok()) return f.status();
    return RandomizedResponse(*f, seed);
  }
  if (name == "truncated_geometric") {
    auto eps = RequireNumber(config, "eps");
    if (!eps.ok()) return eps.status();
    auto n = RequireInt(config, "n");
    if (!n.ok()) return n.status();
    return TruncatedGeometric(*eps, *n, seed);
  }
  if (name == "leaky") {
    auto delta = RequireNumber(config, "delta");
    if (!delta.ok()) return delta.status();
    auto n = RequireInt(config, "n");
    if (!n.ok()) return n.status();
    return LeakyMechanism(*delta, *n, seed);
  }
  if (name == "distributions") {
    if (!config.contains("p0") || !config.contains("p1")) {
      return absl::InvalidArgumentError(
          "\"distributions\" mechanism needs \"p0\" and \"p1\"");
    }
    auto p0 = DistributionFromJson(config["p0"]);
    if (!p0.ok()) return p0.status();
    auto p1 = DistributionFromJson(config["p1"]);
    if (!p1.ok()) return p1.status();
    return FromDistributions(*std::move(p0), *std::move(p1), seed);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mechanism \"", name, "\""));
}

absl::StatusOr<Histogram> Draw(TwoDatabaseOracle& mech, int db,
                               int64_t count) {
  return mech.Draw(db, count);
}

RecordedSamplesOracle::RecordedSamplesOracle(
    std::array<std::vector<int>, 2> pools, int n, uint64_t seed)
    : pools_(std::move(pools)), rng_(seed), n_(n) {}

absl::StatusOr<RecordedSamplesOracle> RecordedSamplesOracle::Create(
    Histogram samples0, Histogram samples1, uint64_t seed) {
  if (samples0.size() != samples1.size() || samples0.empty()) {
    return absl::InvalidArgumentError(
        "recorded histograms must be non-empty and of equal size");
  }
  std::array<std::vector<int>, 2> pools;
  std::array<const Histogram*, 2> hists = {&samples0, &samples1};
  for (int db = 0; db < 2; ++db) {
    for (size_t i = 0; i < hists[db]->size(); ++i) {
      const int64_t c = (*hists[db])[i];
      if (c < 0) {
        return absl::InvalidArgumentError("histogram counts must be >= 0");
      }
      pools[db].insert(pools[db].end(), c, static_cast<int>(i));
    }
  }
  return RecordedSamplesOracle(std::move(pools),
                               static_cast<int>(samples0.size()), seed);
}

absl::StatusOr<Histogram> RecordedSamplesOracle::Draw(int db, int64_t count) {
  if (auto s = CheckDatabase(db); !s.ok()) return s;
  if (auto s = CheckCount(count); !s.ok()) return s;
  auto& pool = pools_[db];
  if (count > static_cast<int64_t>(pool.size())) {
    return absl::FailedPreconditionError(absl::StrCat(
        "sample budget exceeded: requested ", count, " draws from database ",
        db, " but only ", pool.size(), " recorded samples remain"));
  }
  // Partial Fisher-Yates: move a uniform random subset to the back.
  Histogram h(n_, 0);
  for (int64_t k = 0; k < count; ++k) {
    const size_t last = pool.size() - 1;
    const size_t j = std::uniform_int_distribution<size_t>(0, last)(rng_);
    std::swap(pool[j], pool[last]);
    ++h[pool[last]];
    pool.pop_back();
  }
  queries_[db] += count;
  return h;
}

}  // namespace dpaudit
