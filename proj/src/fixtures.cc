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

#include "dpaudit/fixtures.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "absl/strings/str_cat.h"

namespace dpaudit {
namespace {

constexpr double kCertTolerance = 1e-12;

class Certifier {
 public:
  void AtMost(const std::string& name, double value, double bound) {
    Add(name, value, bound, "<=", value <= bound + kCertTolerance);
  }
  void AtLeast(const std::string& name, double value, double bound) {
    Add(name, value, bound, ">=", value >= bound - kCertTolerance);
  }
  void Equal(const std::string& name, double value, double target) {
    Add(name, value, target, "==",
        std::abs(value - target) <= kCertTolerance);
  }
  void Infinite(const std::string& name, ExtendedReal value) {
    checks_.push_back({{"name", name},
                       {"value", value.is_infinite() ? nlohmann::json("inf")
                                                     : nlohmann::json(
                                                           value.value())},
                       {"bound", "inf"},
                       {"relation", "=="},
                       {"pass", value.is_infinite()}});
    ok_ = ok_ && value.is_infinite();
  }
  void Note(const std::string& name, nlohmann::json value) {
    notes_[name] = std::move(value);
  }

  bool ok() const { return ok_; }
  nlohmann::json Report() const {
    nlohmann::json report = notes_;
    report["checks"] = checks_;
    report["certified"] = ok_;
    return report;
  }
  absl::Status Status(const std::string& fixture) const {
    if (ok_) return absl::OkStatus();
    return absl::InternalError(absl::StrCat(
        fixture, " failed certification: ", Report().dump()));
  }

 private:
  void Add(const std::string& name, double value, double bound,
           const char* relation, bool pass) {
    checks_.push_back({{"name", name},
                       {"value", value},
                       {"bound", bound},
                       {"relation", relation},
                       {"pass", pass}});
    ok_ = ok_ && pass;
  }

  nlohmann::json checks_ = nlohmann::json::array();
  nlohmann::json notes_ = nlohmann::json::object();
  bool ok_ = true;
};

double Finite(ExtendedReal x) {
  return x.is_infinite() ? std::numeric_limits<double>::infinity() : x.value();
}

absl::StatusOr<FixturePair> Assemble(std::string name, TruthPair priv,
                                     TruthPair far, nlohmann::json params,
                                     PrivacyParams claim,
                                     const Certifier& cert, uint64_t seed) {
  if (auto s = cert.Status(name); !s.ok()) return s;
  auto private_instance = FromDistributions(std::move(priv.p0),
                                            std::move(priv.p1),
                                            DeriveSeed(seed, {0}));
  if (!private_instance.ok()) return private_instance.status();
  auto far_instance = FromDistributions(std::move(far.p0), std::move(far.p1),
                                        DeriveSeed(seed, {1}));
  if (!far_instance.ok()) return far_instance.status();
  return FixturePair{std::move(name),          *std::move(private_instance),
                     *std::move(far_instance), std::move(params),
                     claim,                    cert.Report()};
}

absl::StatusOr<double> Param(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params[key].is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat("fixture needs numeric parameter \"", key, "\""));
  }
  return params[key].get<double>();
}

nlohmann::json PairJson(const MechanismPair& mech) {
  if (!mech.truth().has_value()) return nullptr;
  return {{"p0", ToJson(mech.truth()->p0)}, {"p1", ToJson(mech.truth()->p1)}};
}

}  // namespace

nlohmann::json ToJson(const FixturePair& fixture) {
  return {{"fixture", fixture.name},
          {"params", fixture.params},
          {"claim", ToJson(fixture.claim)},
          {"private_instance", PairJson(fixture.private_instance)},
          {"far_instance", PairJson(fixture.far_instance)},
          {"certification", fixture.certification}};
}

absl::StatusOr<FixturePair> PdpUnverifiableFixture(double eps, double alpha,
                                                   double a, uint64_t seed) {
  if (!(eps >= 0.0) || !(alpha > 0.0)) {
    return absl::InvalidArgumentError("need eps >= 0 and alpha > 0");
  }
  if (!(a > 2.0 * eps + alpha) || std::isinf(a)) {
    return absl::InvalidArgumentError(
        absl::StrCat("need finite A > 2 eps + alpha = ", 2.0 * eps + alpha,
                     ", got ", a));
  }
  const double m0 = std::exp(-a - eps);
  const double m1 = std::exp(-a);
  const double m2 = std::exp(-2.0 * a);
  auto p0 = DiscreteDistribution::FromProbabilities({m0, 1.0 - m0});
  auto p1 = DiscreteDistribution::FromProbabilities({m1, 1.0 - m1});
  auto q1 = DiscreteDistribution::FromProbabilities({m2, 1.0 - m2});
  if (!p0.ok() || !p1.ok() || !q1.ok()) {
    return absl::InternalError("pdp_unverifiable distributions invalid");
  }
  const PrivacyParams claim = PrivacyParams::Pure(eps);
  Certifier cert;
  auto eps_private = ExactPdpEpsilon(*p0, *p1);
  auto eps_far = ExactPdpEpsilon(*p0, *q1);
  auto far_dist = DistanceFromClaim(*p0, *q1, claim);
  auto tv = TvDistance(*p1, *q1);
  if (!eps_private.ok() || !eps_far.ok() || !far_dist.ok() || !tv.ok()) {
    return absl::InternalError("pdp_unverifiable certification failed");
  }
  cert.AtMost("private_pdp_epsilon", Finite(*eps_private), eps);
  cert.Equal("far_pdp_epsilon", Finite(*eps_far), a - eps);
  cert.AtLeast("far_distance_from_claim", Finite(*far_dist), alpha);
  cert.Note("tv_p1_q1", *tv);
  cert.Note("psi_mass", {{"p0", m0}, {"p1", m1}, {"q1", m2}});
  return Assemble("pdp_unverifiable", {*p0, *p1}, {*p0, *q1},
                  {{"eps", eps}, {"alpha", alpha}, {"A", a}}, claim, cert,
                  seed);
}

absl::StatusOr<FixturePair> AdpTwoPointFixture(double eps, double delta,
                                               double alpha, uint64_t seed) {
  if (!(eps >= 0.0) || !(delta >= 0.0) || !(alpha >= 0.0)) {
    return absl::InvalidArgumentError("need eps, delta, alpha >= 0");
  }
  const double psi = std::exp(eps) / 2.0 + delta;
  if (!(psi + alpha < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need e^eps/2 + delta + alpha < 1, got ", psi + alpha));
  }
  const DiscreteDistribution p0 = DiscreteDistribution::Uniform(2);
  auto p1 = DiscreteDistribution::FromProbabilities({psi, 1.0 - psi});
  auto q1 = DiscreteDistribution::FromProbabilities(
      {psi + alpha, 1.0 - psi - alpha});
  if (!p1.ok() || !q1.ok()) {
    return absl::InternalError("adp_twopoint distributions invalid");
  }
  const PrivacyParams claim = PrivacyParams::Approx(eps, delta);
  auto dir_private = DirectionalDelta(*p1, p0, eps);
  auto dir_far = DirectionalDelta(*q1, p0, eps);
  auto sym_private = DeltaAtEpsilon(p0, *p1, eps);
  auto sym_far = DeltaAtEpsilon(p0, *q1, eps);
  auto far_dist = DistanceFromClaim(p0, *q1, claim);
  if (!dir_private.ok() || !dir_far.ok() || !sym_private.ok() ||
      !sym_far.ok() || !far_dist.ok()) {
    return absl::InternalError("adp_twopoint certification failed");
  }
  Certifier cert;
  cert.Equal("private_directional_delta", *dir_private, delta);
  cert.Equal("far_directional_delta", *dir_far, delta + alpha);
  cert.AtLeast("far_distance_from_claim", Finite(*far_dist), alpha);
  cert.Note("private_delta_at_epsilon", *sym_private);
  cert.Note("far_delta_at_epsilon", *sym_far);
  cert.Note("direction", "p1 against p0");
  return Assemble("adp_twopoint", {p0, *p1}, {p0, *q1},
                  {{"eps", eps}, {"delta", delta}, {"alpha", alpha}}, claim,
                  cert, seed);
}

absl::StatusOr<FixturePair> AdpLowFreqFixture(int n, double delta,
                                              double alpha, uint64_t seed) {
  if (n < 3 || n % 3 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("n must be a positive multiple of 3, got ", n));
  }
  if (!(alpha > 0.0) || !(delta > alpha) || delta > 1.0) {
    return absl::InvalidArgumentError("need 0 < alpha < delta <= 1");
  }
  const double a = (2.0 * delta + alpha) / 3.0;
  const double b = 2.0 * a;
  if (b > 1.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need 2(2 delta + alpha)/3 <= 1, got ", b));
  }
  const int block = n / 3;
  std::vector<double> shared(n, 0.0), moved(n, 0.0);
  for (int i = 0; i < block; ++i) {
    shared[i] = b / block;
    shared[block + i] = (1.0 - b) / block;
    moved[block + i] = (1.0 - b) / block;
    moved[2 * block + i] = b / block;
  }
  auto p = DiscreteDistribution::FromProbabilities(shared);
  auto q1 = DiscreteDistribution::FromProbabilities(moved);
  if (!p.ok() || !q1.ok()) {
    return absl::InternalError("adp_lowfreq distributions invalid");
  }
  const PrivacyParams claim = PrivacyParams::Approx(0.0, delta);
  auto sym_private = DeltaAtEpsilon(*p, *p, 0.0);
  auto sym_far = DeltaAtEpsilon(*p, *q1, 0.0);
  auto far_dist = DistanceFromClaim(*p, *q1, claim);
  if (!sym_private.ok() || !sym_far.ok() || !far_dist.ok()) {
    return absl::InternalError("adp_lowfreq certification failed");
  }
  Certifier cert;
  cert.AtMost("private_delta_at_epsilon", *sym_private, a);
  cert.AtLeast("far_delta_at_epsilon", *sym_far, b);
  cert.AtLeast("far_distance_from_claim", Finite(*far_dist), alpha);
  if (n <= kMaxEnumerationSize) {
    auto bf_private = BruteForceDelta(*p, *p, 0.0);
    auto bf_far = BruteForceDelta(*p, *q1, 0.0);
    if (!bf_private.ok() || !bf_far.ok()) {
      return absl::InternalError("adp_lowfreq brute-force check failed");
    }
    cert.AtMost("private_brute_force_delta", *bf_private, a);
    cert.AtLeast("far_brute_force_delta", *bf_far, b);
  }
  cert.Note("a", a);
  cert.Note("b", b);
  cert.Note("min_positive_mass", std::min(b, 1.0 - b) / block);
  return Assemble("adp_lowfreq", {*p, *p}, {*p, *q1},
                  {{"n", n}, {"delta", delta}, {"alpha", alpha}, {"a", a},
                   {"b", b}},
                  claim, cert, seed);
}

absl::StatusOr<FiPdpFixtureResult> FiPdpFixture(double eps, double alpha,
                                                double beta, uint64_t seed) {
  if (!(eps > 0.0 && eps < std::log(2.0))) {
    return absl::InvalidArgumentError("need 0 < eps < ln 2");
  }
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("need alpha > 0");
  const double e = std::exp(eps);
  if (!(beta > 0.0 && beta < 0.5) || !((1.0 + e) * beta < 1.0)) {
    return absl::InvalidArgumentError(
        "need 0 < beta < 1/2 and (1 + e^eps) beta < 1");
  }
  auto q0 = DiscreteDistribution::FromProbabilities(
      {beta, beta, 1.0 - 2.0 * beta});
  auto q1 = DiscreteDistribution::FromProbabilities(
      {e * beta, beta, 1.0 - (1.0 + e) * beta});
  const double shrunk = std::exp(-alpha) * beta;
  auto far0 = DiscreteDistribution::FromProbabilities(
      {shrunk, 2.0 * beta - shrunk, 1.0 - 2.0 * beta});
  if (!q0.ok() || !q1.ok() || !far0.ok()) {
    return absl::InternalError("fi_pdp distributions invalid");
  }
  auto side = SideInfo::Create(*q0, *q1);
  if (!side.ok()) return side.status();
  const PrivacyParams claim = PrivacyParams::Pure(eps);
  auto eps_side = ExactPdpEpsilon(*q0, *q1);
  auto eps_far = ExactPdpEpsilon(*far0, *q1);
  auto far_dist = DistanceFromClaim(*far0, *q1, claim);
  auto kl = KlDivergence(*far0, *q0);
  const std::array<DiscreteDistribution, 2> pair = {*q0, *q1};
  auto min_mass = MinMass(pair);
  if (!eps_side.ok() || !eps_far.ok() || !far_dist.ok() || !kl.ok() ||
      !min_mass.ok()) {
    return absl::InternalError("fi_pdp certification failed");
  }
  Certifier cert;
  cert.Equal("side_pdp_epsilon", Finite(*eps_side), eps);
  cert.Equal("far_pdp_epsilon", Finite(*eps_far), eps + alpha);
  cert.AtLeast("far_distance_from_claim", Finite(*far_dist), alpha);
  cert.AtMost("far_kl_to_side", Finite(*kl), beta * alpha * alpha);
  cert.Note("beta", *min_mass);
  auto fixture = Assemble("fi_pdp", {*q0, *q1}, {*far0, *q1},
                          {{"eps", eps}, {"alpha", alpha}, {"beta", beta}},
                          claim, cert, seed);
  if (!fixture.ok()) return fixture.status();
  return FiPdpFixtureResult{*std::move(side), *std::move(fixture)};
}

absl::StatusOr<FixturePair> MeanSideInfoFixture(double eps, double alpha,
                                                double a,
                                                const TruthPair& base,
                                                uint64_t seed) {
  const int n = base.p0.size();
  if (n < 2 || base.p1.size() != n) {
    return absl::InvalidArgumentError(
        "base pair needs two distributions over the same [n], n >= 2");
  }
  if (base.p0[n - 1] != 0.0 || base.p1[n - 1] != 0.0) {
    return absl::InvalidArgumentError("base has mass on the last outcome");
  }
  if (!(a > 0.0)) return absl::InvalidArgumentError("need A > 0");
  const double w = std::exp(-a);
  std::vector<double> mixed(n);
  for (int i = 0; i < n; ++i) mixed[i] = (1.0 - w) * base.p0[i];
  mixed[n - 1] = w;
  auto q0 = DiscreteDistribution::FromProbabilities(mixed);
  if (!q0.ok()) return q0.status();
  const PrivacyParams claim = PrivacyParams::Pure(eps);
  auto eps_base = ExactPdpEpsilon(base.p0, base.p1);
  auto eps_far = ExactPdpEpsilon(*q0, base.p1);
  auto far_dist = DistanceFromClaim(*q0, base.p1, claim);
  auto tv = TvDistance(base.p0, *q0);
  if (!eps_base.ok() || !eps_far.ok() || !far_dist.ok() || !tv.ok()) {
    return absl::InternalError("mean_sideinfo certification failed");
  }
  double mean_p = 0.0, mean_q = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_p += i * base.p0[i];
    mean_q += i * (*q0)[i];
  }
  Certifier cert;
  cert.AtMost("private_pdp_epsilon", Finite(*eps_base), eps);
  cert.Infinite("far_pdp_epsilon", *eps_far);
  cert.AtLeast("far_distance_from_claim", Finite(*far_dist), alpha);
  cert.Equal("tv_p0_q0", *tv, w);
  cert.Note("mean_shift", mean_q - mean_p);
  return Assemble("mean_sideinfo", base, {*q0, base.p1},
                  {{"eps", eps},
                   {"alpha", alpha},
                   {"A", a},
                   {"base", {{"p0", ToJson(base.p0)}, {"p1", ToJson(base.p1)}}}},
                  claim, cert, seed);
}

absl::StatusOr<FixturePair> FixtureFromJson(const std::string& name,
                                            const nlohmann::json& params,
                                            uint64_t seed) {
  if (!params.is_object()) {
    return absl::InvalidArgumentError("fixture params must be an object");
  }
  if (name == "pdp_unverifiable") {
    auto eps = Param(params, "eps");
    auto alpha = Param(params, "alpha");
    auto a = Param(params, "A");
    if (!eps.ok()) return eps.status();
    if (!alpha.ok()) return alpha.status();
    if (!a.ok()) return a.status();
    return PdpUnverifiableFixture(*eps, *alpha, *a, seed);
  }
  if (name == "adp_twopoint") {
    auto eps = Param(params, "eps");
    auto delta = Param(params, "delta");
    auto alpha = Param(params, "alpha");
    if (!eps.ok()) return eps.status();
    if (!delta.ok()) return delta.status();
    if (!alpha.ok()) return alpha.status();
    return AdpTwoPointFixture(*eps, *delta, *alpha, seed);
  }
  if (name == "adp_lowfreq") {
    if (!params.contains("n") || !params["n"].is_number_integer()) {
      return absl::InvalidArgumentError("adp_lowfreq needs integer \"n\"");
    }
    auto delta = Param(params, "delta");
    auto alpha = Param(params, "alpha");
    if (!delta.ok()) return delta.status();
    if (!alpha.ok()) return alpha.status();
    return AdpLowFreqFixture(params["n"].get<int>(), *delta, *alpha, seed);
  }
  if (name == "fi_pdp") {
    auto eps = Param(params, "eps");
    auto alpha = Param(params, "alpha");
    auto beta = Param(params, "beta");
    if (!eps.ok()) return eps.status();
    if (!alpha.ok()) return alpha.status();
    if (!beta.ok()) return beta.status();
    auto fixture = FiPdpFixture(*eps, *alpha, *beta, seed);
    if (!fixture.ok()) return fixture.status();
    fixture->pair.certification["side"] = ToJson(fixture->side);
    return std::move(fixture->pair);
  }
  if (name == "mean_sideinfo") {
    auto eps = Param(params, "eps");
    auto alpha = Param(params, "alpha");
    auto a = Param(params, "A");
    if (!eps.ok()) return eps.status();
    if (!alpha.ok()) return alpha.status();
    if (!a.ok()) return a.status();
    if (!params.contains("base") || !params["base"].contains("p0") ||
        !params["base"].contains("p1")) {
      return absl::InvalidArgumentError(
          "mean_sideinfo needs \"base\": {\"p0\", \"p1\"}");
    }
    auto p0 = DistributionFromJson(params["base"]["p0"]);
    if (!p0.ok()) return p0.status();
    auto p1 = DistributionFromJson(params["base"]["p1"]);
    if (!p1.ok()) return p1.status();
    return MeanSideInfoFixture(*eps, *alpha, *a, {*p0, *p1}, seed);
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown fixture \"", name,
      "\"; expected pdp_unverifiable, adp_twopoint, adp_lowfreq, fi_pdp or "
      "mean_sideinfo"));
}

absl::StatusOr<TightPerturbation> TvTightPerturbation(
    const DiscreteDistribution& p0, const DiscreteDistribution& p1, double eps,
    double alpha) {
  if (p0.size() != p1.size()) {
    return absl::InvalidArgumentError("distributions differ in size");
  }
  if (!(alpha > 0.0) || !(eps >= 0.0)) {
    return absl::InvalidArgumentError("need alpha > 0 and eps >= 0");
  }
  auto forward = DirectionalDelta(p0, p1, eps);
  auto backward = DirectionalDelta(p1, p0, eps);
  if (!forward.ok()) return forward.status();
  if (!backward.ok()) return backward.status();
  const int direction = *forward >= *backward ? 0 : 1;
  const double delta = std::max(*forward, *backward);
  const double e = std::exp(eps);
  if (!(delta > 0.0)) {
    return absl::FailedPreconditionError("pair has delta_eps = 0");
  }
  if (alpha > (1.0 - delta) / (1.0 + e)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "alpha must be <= (1 - delta_eps) / (1 + e^eps) = ",
        (1.0 - delta) / (1.0 + e)));
  }
  // p dominates q on the violating event E = {p_i > e^eps q_i}.
  const DiscreteDistribution& p = direction == 0 ? p0 : p1;
  const DiscreteDistribution& q = direction == 0 ? p1 : p0;
  const int n = p.size();
  std::vector<bool> in_e(n);
  double p_e = 0.0, q_e = 0.0;
  for (int i = 0; i < n; ++i) {
    in_e[i] = p[i] > e * q[i];
    if (in_e[i]) {
      p_e += p[i];
      q_e += q[i];
    }
  }
  std::vector<double> pw(p.probs().begin(), p.probs().end());
  std::vector<double> qw(q.probs().begin(), q.probs().end());
  int branch = 1;
  if (1.0 - p_e >= alpha) {
    // Scale p up on E and down off E. Off E every term stays <= 0.
    for (int i = 0; i < n; ++i) {
      pw[i] *= in_e[i] ? 1.0 + alpha / p_e : 1.0 - alpha / (1.0 - p_e);
    }
  } else {
    branch = 2;
    const double shift = alpha / e;
    for (int i = 0; i < n; ++i) {
      qw[i] *= in_e[i] ? 1.0 - shift / q_e : 1.0 + shift / (1.0 - q_e);
    }
  }
  auto p_new = DiscreteDistribution::FromProbabilities(pw);
  auto q_new = DiscreteDistribution::FromProbabilities(qw);
  if (!p_new.ok()) return p_new.status();
  if (!q_new.ok()) return q_new.status();
  auto after = DirectionalDelta(*p_new, *q_new, eps);
  if (!after.ok()) return after.status();
  TightPerturbation result{direction == 0 ? *p_new : *q_new,
                           direction == 0 ? *q_new : *p_new,
                           direction,
                           branch,
                           delta,
                           *after};
  return result;
}

DiscreteDistribution RandomTvPerturbation(const DiscreteDistribution& p,
                                          double alpha, Rng& rng) {
  const int n = p.size();
  if (n < 2 || alpha <= 0.0) return p;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  // Donors are a random prefix; the rest receive.
  std::uniform_int_distribution<int> cut(1, n - 1);
  const int donors = cut(rng);
  double available = 0.0;
  for (int j = 0; j < donors; ++j) available += p[order[j]];
  double budget = std::min(alpha * unit(rng), available);
  std::vector<double> w(p.probs().begin(), p.probs().end());
  double taken = 0.0;
  for (int j = 0; j < donors && taken < budget; ++j) {
    const double t = std::min(w[order[j]], budget - taken);
    w[order[j]] -= t;
    taken += t;
  }
  std::vector<double> share(n - donors);
  double total = 0.0;
  for (double& s : share) total += (s = unit(rng) + 1e-12);
  for (int j = donors; j < n; ++j) {
    w[order[j]] += taken * share[j - donors] / total;
  }
  auto out = MakeDistribution(w);
  return out.ok() ? *std::move(out) : p;
}

absl::StatusOr<int> Distinguish(const OracleTester& tester,
                                TwoDatabaseOracle& mech,
                                const Histogram& unknown_samples, int64_t r,
                                Rng& rng) {
  if (static_cast<int>(unknown_samples.size()) != mech.universe_size()) {
    return absl::InvalidArgumentError(
        "unknown samples do not match the mechanism's universe");
  }
  const int64_t have =
      std::accumulate(unknown_samples.begin(), unknown_samples.end(),
                      int64_t{0});
  if (have != r) {
    return absl::InvalidArgumentError(absl::StrCat(
        "budget mismatch: ", have, " unknown samples for budget ", r));
  }
  auto reference = mech.Draw(0, r);
  if (!reference.ok()) return reference.status();
  auto synthetic =
      RecordedSamplesOracle::Create(unknown_samples, *reference, rng());
  if (!synthetic.ok()) return synthetic.status();
  auto outcome = tester(*synthetic, rng);
  if (!outcome.ok()) {
    if (absl::IsFailedPrecondition(outcome.status())) {
      return absl::FailedPreconditionError(absl::StrCat(
          "budget mismatch: tester needs more than ", r,
          " samples per database (", outcome.status().message(), ")"));
    }
    return outcome.status();
  }
  return outcome->accepted() ? 0 : 1;
}

absl::StatusOr<HardnessDemoResult> RunHardnessDemo(double eps, double alpha,
                                                   int64_t budget, int trials,
                                                   uint64_t seed) {
  if (budget < 1 || trials < 1) {
    return absl::InvalidArgumentError("budget and trials must be >= 1");
  }
  HardnessDemoResult result;
  result.trials = trials;
  result.budget = budget;
  result.a = std::log(100.0 * static_cast<double>(budget));
  auto fixture = PdpUnverifiableFixture(eps, alpha, result.a, seed);
  if (!fixture.ok()) return fixture.status();
  for (int t = 0; t < trials; ++t) {
    const uint64_t trial_seed = DeriveSeed(seed, {static_cast<uint64_t>(t)});
    MechanismPair priv =
        fixture->private_instance.Reseeded(DeriveSeed(trial_seed, {0}));
    MechanismPair far =
        fixture->far_instance.Reseeded(DeriveSeed(trial_seed, {1}));
    std::array<int64_t, 4> psi{};
    int slot = 0;
    for (MechanismPair* mech : {&priv, &far}) {
      for (int db = 0; db < 2; ++db) {
        auto h = mech->Draw(db, budget);
        if (!h.ok()) return h.status();
        psi[slot++] = (*h)[kPsi];
      }
    }
    if (psi[1] == 0 && psi[3] == 0) ++result.absent_differing;
    if (psi[0] == 0 && psi[1] == 0 && psi[2] == 0 && psi[3] == 0) {
      ++result.absent_all;
    }
  }
  return result;
}

}  // namespace dpaudit
