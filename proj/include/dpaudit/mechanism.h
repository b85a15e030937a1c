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

// Two-database mechanisms as black-box sampling oracles.
//
// Testers only ever see a TwoDatabaseOracle: they may draw samples and read
// the query counters. The ground-truth distributions live on MechanismPair,
// which the harness and the fixtures use for certification.

#ifndef DPAUDIT_MECHANISM_H_
#define DPAUDIT_MECHANISM_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "nlohmann/json.hpp"

namespace dpaudit {

using Rng = std::mt19937_64;
using Histogram = std::vector<int64_t>;

// Seeds derived from (seed, path...) through std::seed_seq. Distinct paths
// give statistically independent streams.
uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path);
Rng DeriveRng(uint64_t seed, std::initializer_list<uint64_t> path);

// Sampling oracle for a single database.
class Sampler {
 public:
  virtual ~Sampler() = default;

  virtual int universe_size() const = 0;
  virtual int Sample(Rng& rng) const = 0;
  // Adds `count` i.i.d. draws into `histogram` (size universe_size()).
  virtual void SampleInto(int64_t count, Rng& rng,
                          std::span<int64_t> histogram) const;
};

// Draws from a known distribution. Single draws invert the CDF; histograms
// are drawn as a multinomial through conditional binomials, which has the
// same law as `count` independent single draws.
class DistributionSampler : public Sampler {
 public:
  explicit DistributionSampler(DiscreteDistribution dist);

  int universe_size() const override { return dist_.size(); }
  int Sample(Rng& rng) const override;
  void SampleInto(int64_t count, Rng& rng,
                  std::span<int64_t> histogram) const override;

  const DiscreteDistribution& distribution() const { return dist_; }

 private:
  DiscreteDistribution dist_;
  std::vector<double> cdf_;
};

Histogram SampleHistogram(const Sampler& sampler, int64_t count, Rng& rng);

// What a tester is allowed to touch.
class TwoDatabaseOracle {
 public:
  virtual ~TwoDatabaseOracle() = default;

  virtual int universe_size() const = 0;
  // Histogram of `count` fresh draws from database `db` (0 or 1). Charges
  // exactly `count` queries to that database.
  virtual absl::StatusOr<Histogram> Draw(int db, int64_t count) = 0;
  virtual std::array<int64_t, 2> queries() const = 0;
};

struct TruthPair {
  DiscreteDistribution p0;
  DiscreteDistribution p1;
};

// A two-database algorithm A = (P0, P1). One seed is split into two
// independent substreams, one per database. Single owner: the counters are
// mutable and unsynchronized.
class MechanismPair : public TwoDatabaseOracle {
 public:
  static absl::StatusOr<MechanismPair> FromSamplers(
      std::shared_ptr<const Sampler> sampler0,
      std::shared_ptr<const Sampler> sampler1, uint64_t seed,
      std::optional<TruthPair> truth = std::nullopt);

  MechanismPair(MechanismPair&&) = default;
  MechanismPair& operator=(MechanismPair&&) = default;

  int universe_size() const override { return n_; }
  absl::StatusOr<Histogram> Draw(int db, int64_t count) override;
  std::array<int64_t, 2> queries() const override { return queries_; }

  // Ground truth for the harness. Never passed to testers.
  const std::optional<TruthPair>& truth() const { return truth_; }

  // Same samplers and truth, fresh counters, new seed.
  MechanismPair Reseeded(uint64_t seed) const;

 private:
  MechanismPair(std::shared_ptr<const Sampler> s0,
                std::shared_ptr<const Sampler> s1, uint64_t seed,
                std::optional<TruthPair> truth);

  std::array<std::shared_ptr<const Sampler>, 2> samplers_;
  std::array<Rng, 2> streams_;
  std::array<int64_t, 2> queries_ = {0, 0};
  std::optional<TruthPair> truth_;
  int n_ = 0;
};

// Claimed output distributions (Q0, Q1) for the full-information setting.
struct SideInfo {
  DiscreteDistribution q0;
  DiscreteDistribution q1;

  static absl::StatusOr<SideInfo> Create(DiscreteDistribution q0,
                                         DiscreteDistribution q1);
  int universe_size() const { return q0.size(); }
};

nlohmann::json ToJson(const SideInfo& side);
absl::StatusOr<SideInfo> SideInfoFromJson(const nlohmann::json& json);

absl::StatusOr<MechanismPair> FromDistributions(DiscreteDistribution p0,
                                                DiscreteDistribution p1,
                                                uint64_t seed);

// P0 = (1 - f, f), P1 = (f, 1 - f); exactly ln((1 - f) / f)-pDP.
absl::StatusOr<MechanismPair> RandomizedResponse(double flip_prob,
                                                 uint64_t seed = 0);

// Two-sided geometric noise with ratio e^{-eps} around a count, clamped to
// the universe; the clamped tails collect on the two end outcomes. Database 0
// is centred at outcome ceil(n/2) (1-based), database 1 one step higher; the
// pair is exactly eps-pDP.
absl::StatusOr<MechanismPair> TruncatedGeometric(double eps, int n,
                                                 uint64_t seed = 0);

// Outputs outcome 0 w.p. 1 - delta and a database-specific identifier
// (outcome 1 or 2) w.p. delta: (0, delta)-aDP and no better at any eps.
absl::StatusOr<MechanismPair> LeakyMechanism(double delta, int n,
                                             uint64_t seed = 0);

// Builds a zoo mechanism from {"mechanism": <name>, ...params}. Names:
// randomized_response{flip_prob}, truncated_geometric{eps, n},
// leaky{delta, n}, distributions{p0, p1}.
absl::StatusOr<MechanismPair> MechanismFromJson(const nlohmann::json& config,
                                                uint64_t seed);

// draw(): histogram of `count` draws from database `db`.
absl::StatusOr<Histogram> Draw(TwoDatabaseOracle& mech, int db, int64_t count);

// Serves draws from pre-recorded samples: each request takes a uniformly
// random sub-multiset, without replacement, of what is left (any subset of an
// i.i.d. sample is itself i.i.d.). Fails once a database's pool is exhausted.
class RecordedSamplesOracle : public TwoDatabaseOracle {
 public:
  static absl::StatusOr<RecordedSamplesOracle> Create(Histogram samples0,
                                                      Histogram samples1,
                                                      uint64_t seed);

  int universe_size() const override { return n_; }
  absl::StatusOr<Histogram> Draw(int db, int64_t count) override;
  std::array<int64_t, 2> queries() const override { return queries_; }

 private:
  RecordedSamplesOracle(std::array<std::vector<int>, 2> pools, int n,
                        uint64_t seed);

  std::array<std::vector<int>, 2> pools_;
  Rng rng_;
  std::array<int64_t, 2> queries_ = {0, 0};
  int n_ = 0;
};

}  // namespace dpaudit

#endif  // DPAUDIT_MECHANISM_H_
