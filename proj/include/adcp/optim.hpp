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
#include <string>
#include <utility>
#include <vector>

#include "adcp/tensor.hpp"

namespace adcp {

template <typename S>
using NamedParams = std::vector<std::pair<std::string, Tensor<S>>>;

/// First/second moment buffers, one slot per parameter in registration order.
template <typename S>
struct AdamState {
    struct Moments {
        std::vector<S> m, v;
    };
    std::vector<Moments> slots;
    int64_t t = 0;

    void init_like(const NamedParams<S>& params) {
        slots.assign(params.size(), {});
        for (size_t i = 0; i < params.size(); ++i) {
            slots[i].m.assign(static_cast<size_t>(params[i].second.numel()), S(0));
            slots[i].v.assign(static_cast<size_t>(params[i].second.numel()), S(0));
        }
        t = 0;
    }
};

/// One Adam update from the gradients currently held by the parameters.
template <typename S>
void adam_step(NamedParams<S>& params, AdamState<S>& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8) {
    if (state.slots.size() != params.size()) state.init_like(params);
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        auto vals = params[i].second.data();
        auto grads = params[i].second.grad();
        auto& m = state.slots[i].m;
        auto& v = state.slots[i].v;
        check(m.size() == vals.size(), "adam: state size mismatch for ", params[i].first);
        for (size_t j = 0; j < vals.size(); ++j) {
            const double g = static_cast<double>(grads[j]);
            const double mj = beta1 * static_cast<double>(m[j]) + (1.0 - beta1) * g;
            const double vj = beta2 * static_cast<double>(v[j]) + (1.0 - beta2) * g * g;
            m[j] = static_cast<S>(mj);
            v[j] = static_cast<S>(vj);
            vals[j] -= static_cast<S>(lr * (mj / bc1) / (std::sqrt(vj / bc2) + eps));
        }
    }
}

template <typename S>
void zero_grads(NamedParams<S>& params) {
    for (auto& [name, p] : params) p.zero_grad();
}

} // namespace adcp
