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

#include "dpaudit/test_outcome.h"

#include <string>

namespace dpaudit {

std::string_view VerdictName(Verdict verdict) {
  return verdict == Verdict::kAccept ? "ACCEPT" : "REJECT";
}

nlohmann::json ToJson(const TestOutcome& outcome) {
  return {{"verdict", std::string(VerdictName(outcome.verdict))},
          {"statistic", outcome.statistic},
          {"threshold", outcome.threshold},
          {"queries_used", outcome.queries_used},
          {"diagnostics", outcome.diagnostics}};
}

}  // namespace dpaudit
