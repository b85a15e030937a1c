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

// Python bindings. Structured values cross the boundary as JSON text; the
// dpaudit package decodes them.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpaudit/distribution.h"
#include "dpaudit/fixtures.h"
#include "dpaudit/harness.h"
#include "dpaudit/mechanism.h"
#include "dpaudit/tester_fullinfo.h"
#include "dpaudit/tester_noinfo.h"
#include "nlohmann/json.hpp"
#include "pybind11/pybind11.h"
#include "pybind11/stl.h"

namespace py = pybind11;

namespace dpaudit {
namespace {

void ThrowIfError(const absl::Status& status) {
  if (!status.ok()) throw py::value_error(status.ToString());
}

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  ThrowIfError(value.status());
  return *std::move(value);
}

DiscreteDistribution Dist(std::vector<double> probs) {
  return Unwrap(DiscreteDistribution::FromProbabilities(std::move(probs)));
}

std::vector<double> Probs(const DiscreteDistribution& d) {
  return {d.probs().begin(), d.probs().end()};
}

nlohmann::json ParseJson(const std::string& text) {
  nlohmann::json json = nlohmann::json::parse(text, nullptr, false);
  if (json.is_discarded()) throw py::value_error("invalid JSON");
  return json;
}

SideInfo Side(std::vector<double> q0, std::vector<double> q1) {
  return Unwrap(SideInfo::Create(Dist(std::move(q0)), Dist(std::move(q1))));
}

}  // namespace
}  // namespace dpaudit

PYBIND11_MODULE(_dpaudit, m) {
  using namespace dpaudit;
  m.doc() = "Black-box differential privacy testers.";

  m.def("tv_distance", [](std::vector<double> p, std::vector<double> q) {
    return Unwrap(TvDistance(Dist(std::move(p)), Dist(std::move(q))));
  });
  m.def("kl_divergence", [](std::vector<double> p, std::vector<double> q) {
    return Unwrap(KlDivergence(Dist(std::move(p)), Dist(std::move(q)))).value();
  });
  m.def("max_divergence", [](std::vector<double> p, std::vector<double> q) {
    return Unwrap(MaxDivergence(Dist(std::move(p)), Dist(std::move(q))))
        .value();
  });
  m.def("exact_pdp_epsilon", [](std::vector<double> p, std::vector<double> q) {
    return Unwrap(ExactPdpEpsilon(Dist(std::move(p)), Dist(std::move(q))))
        .value();
  });
  m.def("delta_at_epsilon",
        [](std::vector<double> p, std::vector<double> q, double eps) {
          return Unwrap(
              DeltaAtEpsilon(Dist(std::move(p)), Dist(std::move(q)), eps));
        });
  m.def("brute_force_delta",
        [](std::vector<double> p, std::vector<double> q, double eps) {
          return Unwrap(
              BruteForceDelta(Dist(std::move(p)), Dist(std::move(q)), eps));
        });
  m.def("adp_ni_rate", &AdpNiRate, py::arg("n"), py::arg("eps"),
        py::arg("alpha"));

  py::class_<MechanismPair>(m, "Mechanism")
      .def_static("randomized_response",
                  [](double flip, uint64_t seed) {
                    return Unwrap(RandomizedResponse(flip, seed));
                  },
                  py::arg("flip_prob"), py::arg("seed") = 0)
      .def_static("truncated_geometric",
                  [](double eps, int n, uint64_t seed) {
                    return Unwrap(TruncatedGeometric(eps, n, seed));
                  },
                  py::arg("eps"), py::arg("n"), py::arg("seed") = 0)
      .def_static("leaky",
                  [](double delta, int n, uint64_t seed) {
                    return Unwrap(LeakyMechanism(delta, n, seed));
                  },
                  py::arg("delta"), py::arg("n"), py::arg("seed") = 0)
      .def_static("from_distributions",
                  [](std::vector<double> p0, std::vector<double> p1,
                     uint64_t seed) {
                    return Unwrap(FromDistributions(Dist(std::move(p0)),
                                                    Dist(std::move(p1)), seed));
                  },
                  py::arg("p0"), py::arg("p1"), py::arg("seed") = 0)
      .def_static("from_json",
                  [](const std::string& config, uint64_t seed) {
                    return Unwrap(MechanismFromJson(ParseJson(config), seed));
                  },
                  py::arg("config"), py::arg("seed") = 0)
      .def_property_readonly("universe_size", &MechanismPair::universe_size)
      .def_property_readonly("queries", &MechanismPair::queries)
      .def_property_readonly(
          "truth",
          [](const MechanismPair& mech)
              -> std::optional<std::pair<std::vector<double>,
                                         std::vector<double>>> {
            if (!mech.truth().has_value()) return std::nullopt;
            return std::make_pair(Probs(mech.truth()->p0),
                                  Probs(mech.truth()->p1));
          })
      .def("draw",
           [](MechanismPair& mech, int db, int64_t count) {
             return Unwrap(mech.Draw(db, count));
           },
           py::arg("db"), py::arg("count"))
      .def("reseeded", &MechanismPair::Reseeded, py::arg("seed"));

  m.def(
      "adp_test_noinfo",
      [](MechanismPair& mech, double eps, double delta, double alpha,
         uint64_t seed, std::optional<double> lambda_rate, bool poissonize,
         bool both_directions) {
        AdpNiConfig cfg;
        cfg.n = mech.universe_size();
        cfg.eps = eps;
        cfg.delta = delta;
        cfg.alpha = alpha;
        cfg.lambda_rate = lambda_rate;
        cfg.poissonize = poissonize;
        cfg.both_directions = both_directions;
        Rng rng(seed);
        return ToJson(Unwrap(AdpTestNoInfo(mech, cfg, rng))).dump();
      },
      py::arg("mech"), py::arg("eps"), py::arg("delta"), py::arg("alpha"),
      py::arg("seed") = 0, py::arg("lambda_rate") = std::nullopt,
      py::arg("poissonize") = true, py::arg("both_directions") = true);

  m.def(
      "adp_test_fullinfo",
      [](MechanismPair& mech, std::vector<double> q0, std::vector<double> q1,
         double eps, double delta, double alpha, uint64_t seed) {
        Rng rng(seed);
        return ToJson(Unwrap(AdpTestFullInfo(
                          mech, Side(std::move(q0), std::move(q1)), eps, delta,
                          alpha, rng)))
            .dump();
      },
      py::arg("mech"), py::arg("q0"), py::arg("q1"), py::arg("eps"),
      py::arg("delta"), py::arg("alpha"), py::arg("seed") = 0);

  m.def(
      "pdp_test_fullinfo",
      [](MechanismPair& mech, std::vector<double> q0, std::vector<double> q1,
         double eps, double alpha, uint64_t seed, std::optional<double> beta) {
        FiPdpConfig cfg{.eps = eps, .alpha = alpha, .beta = beta};
        Rng rng(seed);
        return ToJson(Unwrap(PdpTestFullInfo(
                          mech, Side(std::move(q0), std::move(q1)), cfg, rng)))
            .dump();
      },
      py::arg("mech"), py::arg("q0"), py::arg("q1"), py::arg("eps"),
      py::arg("alpha"), py::arg("seed") = 0, py::arg("beta") = std::nullopt);

  m.def(
      "calibrate_identity_threshold",
      [](std::vector<double> q, double alpha, double confidence, int trials,
         uint64_t seed) {
        IdentityTesterConfig cfg{.alpha = alpha, .confidence = confidence};
        Rng rng(seed);
        return Unwrap(
            CalibrateIdentityThreshold(Dist(std::move(q)), cfg, trials, rng));
      },
      py::arg("q"), py::arg("alpha"), py::arg("confidence") = 2.0 / 3.0,
      py::arg("trials") = 1000, py::arg("seed") = 0);

  m.def(
      "fixture",
      [](const std::string& name, const std::string& params, uint64_t seed) {
        return ToJson(Unwrap(FixtureFromJson(name, ParseJson(params), seed)))
            .dump();
      },
      py::arg("name"), py::arg("params"), py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config) {
        const ExperimentConfig cfg =
            Unwrap(ExperimentConfigFromJson(ParseJson(config)));
        return ToJson(Unwrap(RunExperiment(cfg))).dump();
      },
      py::arg("config"));
}
