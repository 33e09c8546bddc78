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

#include <cstdio>

#include "adcp/aggregation.hpp"
#include "adcp/backbone.hpp"
#include "adcp/costvol.hpp"
#include "adcp/dop.hpp"
#include "adcp/gradcheck.hpp"
#include "adcp/regression.hpp"

int main() {
    using adcp::Tensor;
    adcp::Rng rng(7);
    auto x = Tensor<double>::from({2, 2}, {1, 2, 3, 4});
    x.set_requires_grad(true);
    adcp::Tape<double> tape;
    auto y = adcp::sum(adcp::mul(x, x));
    tape.backward(y);
    std::printf("sum=%g grad0=%g\n", y.item(), x.grad()[0]);

    auto pb = adcp::BackboneParams<double>::make(rng, 2);
    auto img = Tensor<double>::zeros({3, 32, 32});
    auto fp = adcp::extract_features(img, pb);
    std::printf("f16 channels=%d\n", fp.f16.dim(0));

    double err = adcp::finite_diff_check(
        [](const Tensor<double>& t) { return adcp::sum(adcp::softmax(t, 0)); },
        Tensor<double>::from({3}, {0.1, -0.2, 0.3}));
    std::printf("fd err=%g\n", err);
    return 0;
}
