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

#include <cmath>
#include <vector>

#include "adcp/tensor.hpp"

namespace adcp {

/// Compares the taped gradient of a scalar-valued function against central
/// finite differences at every coordinate of x. Returns the largest relative
/// error max_i |analytic_i - fd_i| / (|analytic_i| + 1e-8).
template <typename S, typename F>
double finite_diff_check(F&& f, Tensor<S> x, double eps = 1e-4) {
    x.set_requires_grad(true);
    {
        Tape<S> tape;
        Tensor<S> y = f(x);
        check(y.numel() == 1, "finite_diff_check: f must be scalar-valued, got shape ",
              to_string(y.shape()));
        tape.backward(y);
    }
    std::vector<double> analytic(x.grad().begin(), x.grad().end());

    double max_rel = 0.0;
    NoGradScope<S> forward_only;
    auto vals = x.data();
    for (int64_t i = 0; i < x.numel(); ++i) {
        const S orig = vals[i];
        vals[i] = orig + static_cast<S>(eps);
        const double fp = static_cast<double>(f(x).item());
        vals[i] = orig - static_cast<S>(eps);
        const double fm = static_cast<double>(f(x).item());
        vals[i] = orig;
        const double fd = (fp - fm) / (2.0 * eps);
        const double rel = std::abs(analytic[static_cast<size_t>(i)] - fd) /
                           (std::abs(analytic[static_cast<size_t>(i)]) + 1e-8);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

} // namespace adcp
