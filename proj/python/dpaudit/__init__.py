# Copyright 2026 The dp-audit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Black-box differential privacy testers."""

import json

from dpaudit import _dpaudit
from dpaudit._dpaudit import (
    Mechanism,
    adp_ni_rate,
    brute_force_delta,
    calibrate_identity_threshold,
    delta_at_epsilon,
    exact_pdp_epsilon,
    kl_divergence,
    max_divergence,
    tv_distance,
)

__all__ = [
    "Mechanism",
    "adp_ni_rate",
    "adp_test_fullinfo",
    "adp_test_noinfo",
    "brute_force_delta",
    "calibrate_identity_threshold",
    "delta_at_epsilon",
    "exact_pdp_epsilon",
    "fixture",
    "kl_divergence",
    "max_divergence",
    "pdp_test_fullinfo",
    "run_experiment",
    "tv_distance",
]


def adp_test_noinfo(mech, eps, delta, alpha, seed=0, lambda_rate=None,
                    poissonize=True, both_directions=True):
  """Approximate-DP test without side information; returns the outcome."""
  return json.loads(
      _dpaudit.adp_test_noinfo(mech, eps, delta, alpha, seed, lambda_rate,
                               poissonize, both_directions))


def adp_test_fullinfo(mech, q0, q1, eps, delta, alpha, seed=0):
  return json.loads(
      _dpaudit.adp_test_fullinfo(mech, q0, q1, eps, delta, alpha, seed))


def pdp_test_fullinfo(mech, q0, q1, eps, alpha, seed=0, beta=None):
  return json.loads(
      _dpaudit.pdp_test_fullinfo(mech, q0, q1, eps, alpha, seed, beta))


def fixture(name, params, seed=0):
  """Certified lower-bound construction as a dict."""
  return json.loads(_dpaudit.fixture(name, json.dumps(params), seed))


def run_experiment(config):
  """Runs an experiment described by a dict; returns claim, oc and records."""
  return json.loads(_dpaudit.run_experiment(json.dumps(config)))
