// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace adcp::selftest {

struct Options {
    // Multiplies one analytic gradient by (1 + corruption) inside the
    // gradient suite; nonzero values must make the suite fail (used to prove
    // the detector actually detects).
    double gradient_corruption = 0.0;
};

struct Check {
    std::string name;
    std::string group;  // "grad" | "oracle" | "identity" | "metric"
    bool pass = false;
    std::string detail;
};

struct Report {
    std::vector<Check> checks;
    double seconds = 0.0;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Gradient checks, convolution oracles, DIC equivalence, regression
/// identities and metric oracles in one run.
Report run(const Options& opts = {});

void print(const Report& rep, std::ostream& os);

} // namespace adcp::selftest
