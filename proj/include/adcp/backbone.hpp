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

#include <optional>

#include "adcp/layers.hpp"

namespace adcp {

/// Two 3x3 convs plus skip; the skip path projects with a 1x1 conv whenever
/// the stride or channel count changes. Activations are leaky-ReLU(0.1).
template <typename S>
struct ResidualBlockParams {
    Conv2dLayer<S> conv1;  // stride = block stride
    Conv2dLayer<S> conv2;  // stride 1
    std::optional<Conv2dLayer<S>> proj;

    static ResidualBlockParams make(Rng& rng, int cin, int cout, int stride) {
        check(stride == 1 || stride == 2, "residual block stride must be 1 or 2, got ", stride);
        ResidualBlockParams p;
        p.conv1 = Conv2dLayer<S>::make(rng, cout, cin, 3, stride, 1);
        p.conv2 = Conv2dLayer<S>::make(rng, cout, cout, 3, 1, 1);
        if (stride != 1 || cin != cout)
            p.proj = Conv2dLayer<S>::make(rng, cout, cin, 1, stride, 0);
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        conv1.for_each_param(prefix + ".conv1", fn);
        conv2.for_each_param(prefix + ".conv2", fn);
        if (proj) proj->for_each_param(prefix + ".proj", fn);
    }
};

template <typename S>
Tensor<S> residual_block(const Tensor<S>& x, const ResidualBlockParams<S>& p) {
    Tensor<S> main = p.conv2(leaky_relu(p.conv1(x)));
    Tensor<S> skip = p.proj ? (*p.proj)(x) : x;
    return leaky_relu(add(main, skip));
}

/// Per-image feature maps at 1/2, 1/4, 1/8 and 1/16 resolution with channel
/// counts 2C, 2C, 4C and 8C.
template <typename S>
struct FeaturePyramid {
    Tensor<S> f2, f4, f8, f16;
};

template <typename S>
struct BackboneParams {
    int C = 0;
    Conv2dLayer<S> stem;  // 3 -> 2C, stride 1, full resolution
    ResidualBlockParams<S> down2, down4, down8, down16;

    static BackboneParams make(Rng& rng, int C) {
        check(C >= 1, "backbone: C must be positive");
        BackboneParams p;
        p.C = C;
        p.stem = Conv2dLayer<S>::make(rng, 2 * C, 3, 3, 1, 1);
        p.down2 = ResidualBlockParams<S>::make(rng, 2 * C, 2 * C, 2);
        p.down4 = ResidualBlockParams<S>::make(rng, 2 * C, 2 * C, 2);
        p.down8 = ResidualBlockParams<S>::make(rng, 2 * C, 4 * C, 2);
        p.down16 = ResidualBlockParams<S>::make(rng, 4 * C, 8 * C, 2);
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        stem.for_each_param(prefix + ".stem", fn);
        down2.for_each_param(prefix + ".down2", fn);
        down4.for_each_param(prefix + ".down4", fn);
        down8.for_each_param(prefix + ".down8", fn);
        down16.for_each_param(prefix + ".down16", fn);
    }
};

/// Shared-weight pyramid extraction; the same params serve left and right.
template <typename S>
FeaturePyramid<S> extract_features(const Tensor<S>& img, const BackboneParams<S>& p) {
    check(img.ndim() == 3 && img.dim(0) == 3, "extract_features: image must be [3,H,W], got ",
          to_string(img.shape()));
    check(img.dim(1) % 16 == 0 && img.dim(2) % 16 == 0,
          "extract_features: H and W must be divisible by 16, got ", img.dim(1), "x", img.dim(2));
    FeaturePyramid<S> fp;
    Tensor<S> x = leaky_relu(p.stem(img));
    fp.f2 = residual_block(x, p.down2);
    fp.f4 = residual_block(fp.f2, p.down4);
    fp.f8 = residual_block(fp.f4, p.down8);
    fp.f16 = residual_block(fp.f8, p.down16);
    return fp;
}

/// Two stride-1 residual blocks at 1/16 resolution producing the unary
/// matching feature.
template <typename S>
struct UnaryParams {
    ResidualBlockParams<S> block1, block2;

    static UnaryParams make(Rng& rng, int channels) {
        UnaryParams p;
        p.block1 = ResidualBlockParams<S>::make(rng, channels, channels, 1);
        p.block2 = ResidualBlockParams<S>::make(rng, channels, channels, 1);
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        block1.for_each_param(prefix + ".block1", fn);
        block2.for_each_param(prefix + ".block2", fn);
    }
};

template <typename S>
Tensor<S> stage1_unary(const Tensor<S>& f16, const UnaryParams<S>& p) {
    return residual_block(residual_block(f16, p.block1), p.block2);
}

} // namespace adcp
