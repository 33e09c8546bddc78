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

#include <array>
#include <utility>

#include "adcp/layers.hpp"

namespace adcp {

template <typename S>
using CostPair = std::pair<Tensor<S>, Tensor<S>>;  // (intermediate, final)

/// Stage-1 regularization: six 3x3x3 convolutions at feature size C_3d with
/// cost heads after layer 1 and layer 6.
template <typename S>
struct Stage1Params {
    std::array<Conv3dLayer<S>, 6> layers;
    Conv3dLayer<S> head_inter, head_final;  // C_3d -> 1

    static Stage1Params make(Rng& rng, int in_channels, int c3d) {
        Stage1Params p;
        p.layers[0] = Conv3dLayer<S>::make(rng, c3d, in_channels, 3, 1, 1);
        for (size_t i = 1; i < 6; ++i) p.layers[i] = Conv3dLayer<S>::make(rng, c3d, c3d, 3, 1, 1);
        p.head_inter = Conv3dLayer<S>::make(rng, 1, c3d, 3, 1, 1);
        p.head_final = Conv3dLayer<S>::make(rng, 1, c3d, 3, 1, 1);
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        for (size_t i = 0; i < 6; ++i)
            layers[i].for_each_param(prefix + ".conv" + std::to_string(i + 1), fn);
        head_inter.for_each_param(prefix + ".head_inter", fn);
        head_final.for_each_param(prefix + ".head_final", fn);
    }
};

template <typename S>
CostPair<S> regularize_full(const Tensor<S>& vol, const Stage1Params<S>& p) {
    check(vol.ndim() == 4, "regularize_full: volume must be [2F,D,H,W], got ",
          to_string(vol.shape()));
    const int d = vol.dim(1), h = vol.dim(2), w = vol.dim(3);
    Tensor<S> a = leaky_relu(p.layers[0](vol));
    Tensor<S> cost_inter = reshape(p.head_inter(a), {d, h, w});
    for (size_t i = 1; i < 6; ++i) a = leaky_relu(p.layers[i](a));
    Tensor<S> cost_final = reshape(p.head_final(a), {d, h, w});
    return {cost_inter, cost_final};
}

/// Disparity-independent convolution stack. Folding the N candidates into the
/// channel axis makes each output unit of the first layer a 3x3xN kernel with
/// its own weights for every candidate slice; the whole stack runs as plain
/// 2D convolution, one pass over H x W with no sweep along the candidate
/// axis. Hidden width is a fixed 2*C_3d so the stage-2 cost stays linear in N.
template <typename S>
struct DicParams {
    int n = 0;
    int width = 0;
    std::array<Conv2dLayer<S>, 6> layers;   // [0]: 2F'*N -> width, rest width -> width
    Conv2dLayer<S> head_inter, head_final;  // width -> N

    static DicParams make(Rng& rng, int feat2, int n, int c3d) {
        check(n >= 1, "dic: N must be >= 1");
        DicParams p;
        p.n = n;
        p.width = 2 * c3d;
        p.layers[0] = Conv2dLayer<S>::make(rng, p.width, feat2 * n, 3, 1, 1);
        for (size_t i = 1; i < 6; ++i)
            p.layers[i] = Conv2dLayer<S>::make(rng, p.width, p.width, 3, 1, 1);
        p.head_inter = Conv2dLayer<S>::make(rng, n, p.width, 3, 1, 1);
        p.head_final = Conv2dLayer<S>::make(rng, n, p.width, 3, 1, 1);
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        for (size_t i = 0; i < 6; ++i)
            layers[i].for_each_param(prefix + ".conv" + std::to_string(i + 1), fn);
        head_inter.for_each_param(prefix + ".head_inter", fn);
        head_final.for_each_param(prefix + ".head_final", fn);
    }
};

template <typename S>
CostPair<S> dic_forward(const Tensor<S>& vol, const DicParams<S>& p) {
    check(vol.ndim() == 4, "dic_forward: volume must be [2F,N,H,W], got ", to_string(vol.shape()));
    check(vol.dim(1) == p.n, "dic_forward: volume has ", vol.dim(1), " candidates, params expect ",
          p.n);
    const int f2 = vol.dim(0), h = vol.dim(2), w = vol.dim(3);
    Tensor<S> x = reshape(vol, {f2 * p.n, h, w});
    Tensor<S> a = leaky_relu(p.layers[0](x));
    Tensor<S> cost_inter = p.head_inter(a);
    for (size_t i = 1; i < 6; ++i) a = leaky_relu(p.layers[i](a));
    Tensor<S> cost_final = p.head_final(a);
    return {cost_inter, cost_final};
}

namespace detail {

// Plain nested-loop 3x3 convolution on [C,H,W] buffers, zero padding 1.
template <typename S>
void naive_conv3x3(const std::vector<S>& in, int cin, int h, int w, const Tensor<S>& weight,
                   const Tensor<S>& bias, std::vector<S>& out, int cout) {
    const S* wv = weight.data().data();
    const S* bv = bias.data().data();
    out.assign(static_cast<size_t>(int64_t(cout) * h * w), S(0));
    for (int u = 0; u < cout; ++u) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                S acc = bv[u];
                for (int c = 0; c < cin; ++c) {
                    for (int dy = 0; dy < 3; ++dy) {
                        const int iy = y + dy - 1;
                        if (iy < 0 || iy >= h) continue;
                        for (int dx = 0; dx < 3; ++dx) {
                            const int ix = x + dx - 1;
                            if (ix < 0 || ix >= w) continue;
                            acc += wv[((int64_t(u) * cin + c) * 3 + dy) * 3 + dx] *
                                   in[(int64_t(c) * h + iy) * w + ix];
                        }
                    }
                }
                out[(int64_t(u) * h + y) * w + x] = acc;
            }
        }
    }
}

} // namespace detail

/// Direct-definition oracle for the DIC stack: the first layer is computed as
/// a weight-unshared 3x3xN convolution over the unreshaped [2F,N,H,W] volume
/// (each output unit owns a distinct kernel slice per candidate), the later
/// layers and heads as nested-loop 2D convolutions. No im2col, no reshaping;
/// dic_forward must match this to 1e-6.
template <typename S>
CostPair<S> dic_oracle(const Tensor<S>& vol, const DicParams<S>& p) {
    check(vol.ndim() == 4 && vol.dim(1) == p.n, "dic_oracle: bad volume shape ",
          to_string(vol.shape()));
    const int f = vol.dim(0), n = p.n, h = vol.dim(2), w = vol.dim(3);
    const int width = p.width;
    const S* vv = vol.data().data();
    const S* w0 = p.layers[0].w.data().data();  // [width, f*n, 3, 3]
    const S* b0 = p.layers[0].b.data().data();

    const auto lrelu = [](S v) { return v > S(0) ? v : S(0.1) * v; };

    // Layer 1: for each output unit, a 3x3xN kernel with candidate-specific
    // weights applied across all N candidate slices.
    std::vector<S> act(static_cast<size_t>(int64_t(width) * h * w), S(0));
    for (int u = 0; u < width; ++u) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                S acc = b0[u];
                for (int c = 0; c < f; ++c) {
                    for (int cand = 0; cand < n; ++cand) {
                        for (int dy = 0; dy < 3; ++dy) {
                            const int iy = y + dy - 1;
                            if (iy < 0 || iy >= h) continue;
                            for (int dx = 0; dx < 3; ++dx) {
                                const int ix = x + dx - 1;
                                if (ix < 0 || ix >= w) continue;
                                // flat channel (c,cand) = c*N + cand
                                acc += w0[((int64_t(u) * f * n + int64_t(c) * n + cand) * 3 + dy) *
                                              3 +
                                          dx] *
                                       vv[((int64_t(c) * n + cand) * h + iy) * w + ix];
                            }
                        }
                    }
                }
                act[(int64_t(u) * h + y) * w + x] = lrelu(acc);
            }
        }
    }

    std::vector<S> inter_buf, tmp;
    detail::naive_conv3x3(act, width, h, w, p.head_inter.w, p.head_inter.b, inter_buf, n);
    for (size_t i = 1; i < 6; ++i) {
        detail::naive_conv3x3(act, width, h, w, p.layers[i].w, p.layers[i].b, tmp, width);
        for (S& v : tmp) v = lrelu(v);
        act.swap(tmp);
    }
    std::vector<S> final_buf;
    detail::naive_conv3x3(act, width, h, w, p.head_final.w, p.head_final.b, final_buf, n);

    return {Tensor<S>::from({n, h, w}, std::move(inter_buf)),
            Tensor<S>::from({n, h, w}, std::move(final_buf))};
}

/// Stage-2 baseline for ablations: standard weight-shared 3x3x3 3D
/// convolutions over the compact volume, candidate axis treated as depth.
template <typename S>
struct Stage2Conv3dParams {
    std::array<Conv3dLayer<S>, 6> layers;
    Conv3dLayer<S> head_inter, head_final;

    static Stage2Conv3dParams make(Rng& rng, int in_channels, int c3d) {
        Stage2Conv3dParams p;
        p.layers[0] = Conv3dLayer<S>::make(rng, c3d, in_channels, 3, 1, 1);
        for (size_t i = 1; i < 6; ++i) p.layers[i] = Conv3dLayer<S>::make(rng, c3d, c3d, 3, 1, 1);
        p.head_inter = Conv3dLayer<S>::make(rng, 1, c3d, 3, 1, 1);
        p.head_final = Conv3dLayer<S>::make(rng, 1, c3d, 3, 1, 1);
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        for (size_t i = 0; i < 6; ++i)
            layers[i].for_each_param(prefix + ".conv" + std::to_string(i + 1), fn);
        head_inter.for_each_param(prefix + ".head_inter", fn);
        head_final.for_each_param(prefix + ".head_final", fn);
    }
};

template <typename S>
CostPair<S> regularize_compact_3d(const Tensor<S>& vol, const Stage2Conv3dParams<S>& p) {
    check(vol.ndim() == 4, "regularize_compact_3d: volume must be [2F,N,H,W]");
    const int n = vol.dim(1), h = vol.dim(2), w = vol.dim(3);
    Tensor<S> a = leaky_relu(p.layers[0](vol));
    Tensor<S> cost_inter = reshape(p.head_inter(a), {n, h, w});
    for (size_t i = 1; i < 6; ++i) a = leaky_relu(p.layers[i](a));
    Tensor<S> cost_final = reshape(p.head_final(a), {n, h, w});
    return {cost_inter, cost_final};
}

} // namespace adcp
