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

#include <functional>
#include <string>

#include "adcp/conv.hpp"
#include "adcp/ops.hpp"
#include "adcp/random.hpp"

namespace adcp {

template <typename S>
using ParamVisitor = std::function<void(const std::string&, Tensor<S>&)>;

namespace detail {
template <typename S>
Tensor<S> he_init(Rng& rng, Shape shape, int64_t fan_in, double gain = 1.0) {
    Tensor<S> t = Tensor<S>::zeros(std::move(shape));
    const double bound = gain * he_uniform_bound(fan_in);
    for (S& v : t.data()) v = static_cast<S>(rand_uniform(rng, -bound, bound));
    t.set_requires_grad(true);
    return t;
}
} // namespace detail

template <typename S>
struct Conv2dLayer {
    Tensor<S> w;  // [Cout, Cin, kh, kw]
    Tensor<S> b;  // [Cout]
    int stride = 1;
    int pad = 0;

    static Conv2dLayer make(Rng& rng, int cout, int cin, int k, int stride, int pad,
                            double gain = 1.0) {
        Conv2dLayer l;
        l.w = detail::he_init<S>(rng, {cout, cin, k, k}, int64_t(cin) * k * k, gain);
        l.b = Tensor<S>::zeros({cout});
        l.b.set_requires_grad(true);
        l.stride = stride;
        l.pad = pad;
        return l;
    }

    Tensor<S> operator()(const Tensor<S>& x) const { return conv2d(x, w, b, stride, pad); }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        fn(prefix + ".w", w);
        fn(prefix + ".b", b);
    }
};

template <typename S>
struct Conv3dLayer {
    Tensor<S> w;  // [Cout, Cin, kd, kh, kw]
    Tensor<S> b;  // [Cout]
    int stride = 1;
    int pad = 0;

    static Conv3dLayer make(Rng& rng, int cout, int cin, int k, int stride, int pad,
                            double gain = 1.0) {
        Conv3dLayer l;
        l.w = detail::he_init<S>(rng, {cout, cin, k, k, k}, int64_t(cin) * k * k * k, gain);
        l.b = Tensor<S>::zeros({cout});
        l.b.set_requires_grad(true);
        l.stride = stride;
        l.pad = pad;
        return l;
    }

    Tensor<S> operator()(const Tensor<S>& x) const { return conv3d(x, w, b, stride, pad); }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        fn(prefix + ".w", w);
        fn(prefix + ".b", b);
    }
};

} // namespace adcp
