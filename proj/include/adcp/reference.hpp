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

#include <algorithm>
#include <cmath>
#include <vector>

#include "adcp/tensor.hpp"

// Direct-definition reference implementations. These stay nested-loop,
// gather-based and GEMM-free on purpose: the optimized kernels are held to
// them in the test suites and the self-test command.

namespace adcp::reference {

template <typename S>
Tensor<S> conv2d(const Tensor<S>& in, const Tensor<S>& w, const Tensor<S>& b, int stride,
                 int pad) {
    const int cin = in.dim(0), h = in.dim(1), ww = in.dim(2);
    const int cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (ww + 2 * pad - kw) / stride + 1;
    Tensor<S> out = Tensor<S>::zeros({cout, oh, ow});
    for (int u = 0; u < cout; ++u)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                S acc = b.data()[static_cast<size_t>(u)];
                for (int c = 0; c < cin; ++c)
                    for (int dy = 0; dy < kh; ++dy)
                        for (int dx = 0; dx < kw; ++dx) {
                            const int iy = oy * stride + dy - pad;
                            const int ix = ox * stride + dx - pad;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                            acc += w.at({u, c, dy, dx}) * in.at({c, iy, ix});
                        }
                out.data()[(int64_t(u) * oh + oy) * ow + ox] = acc;
            }
    return out;
}

template <typename S>
Tensor<S> conv3d(const Tensor<S>& in, const Tensor<S>& w, const Tensor<S>& b, int stride,
                 int pad) {
    const int cin = in.dim(0), d = in.dim(1), h = in.dim(2), ww = in.dim(3);
    const int cout = w.dim(0), kd = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    const int od = (d + 2 * pad - kd) / stride + 1;
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (ww + 2 * pad - kw) / stride + 1;
    Tensor<S> out = Tensor<S>::zeros({cout, od, oh, ow});
    for (int u = 0; u < cout; ++u)
        for (int oz = 0; oz < od; ++oz)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    S acc = b.data()[static_cast<size_t>(u)];
                    for (int c = 0; c < cin; ++c)
                        for (int dz = 0; dz < kd; ++dz)
                            for (int dy = 0; dy < kh; ++dy)
                                for (int dx = 0; dx < kw; ++dx) {
                                    const int iz = oz * stride + dz - pad;
                                    const int iy = oy * stride + dy - pad;
                                    const int ix = ox * stride + dx - pad;
                                    if (iz < 0 || iz >= d || iy < 0 || iy >= h || ix < 0 ||
                                        ix >= ww)
                                        continue;
                                    acc += w.at({u, c, dz, dy, dx}) * in.at({c, iz, iy, ix});
                                }
                    out.data()[((int64_t(u) * od + oz) * oh + oy) * ow + ox] = acc;
                }
    return out;
}

/// Per-pixel construction of the full-range volume.
template <typename S>
Tensor<S> full_volume(const Tensor<S>& left, const Tensor<S>& right, int d_levels) {
    const int f = left.dim(0), h = left.dim(1), w = left.dim(2);
    Tensor<S> out = Tensor<S>::zeros({2 * f, d_levels, h, w});
    for (int d = 0; d < d_levels; ++d)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < f; ++c) {
                    out.data()[out.index({c, d, y, x})] = left.at({c, y, x});
                    out.data()[out.index({f + c, d, y, x})] =
                        x - d >= 0 ? right.at({c, y, x - d}) : S(0);
                }
    return out;
}

/// Scalar interpolation warp: out(c,y,x) = right(c, y, x - disp(y,x)).
template <typename S>
Tensor<S> warp(const Tensor<S>& right, const Tensor<S>& disp) {
    const int f = right.dim(0), h = right.dim(1), w = right.dim(2);
    Tensor<S> out = Tensor<S>::zeros({f, h, w});
    for (int c = 0; c < f; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double xs = x - static_cast<double>(disp.at({y, x}));
                const int x0 = static_cast<int>(std::floor(xs));
                const double w1 = xs - x0;
                double v = 0.0;
                if (x0 >= 0 && x0 < w) v += (1.0 - w1) * static_cast<double>(right.at({c, y, x0}));
                if (x0 + 1 >= 0 && x0 + 1 < w)
                    v += w1 * static_cast<double>(right.at({c, y, x0 + 1}));
                out.data()[out.index({c, y, x})] = static_cast<S>(v);
            }
    return out;
}

// Scalar-loop metric oracles over (error, gt, valid) triples.
inline double epe(const std::vector<double>& err, const std::vector<bool>& valid) {
    double s = 0.0;
    int64_t n = 0;
    for (size_t i = 0; i < err.size(); ++i)
        if (valid[i]) {
            s += std::abs(err[i]);
            ++n;
        }
    return s / static_cast<double>(n);
}

inline double px(const std::vector<double>& err, const std::vector<bool>& valid, double t) {
    int64_t n = 0, bad = 0;
    for (size_t i = 0; i < err.size(); ++i)
        if (valid[i]) {
            ++n;
            if (std::abs(err[i]) > t) ++bad;
        }
    return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

inline double d1(const std::vector<double>& err, const std::vector<double>& gt,
                 const std::vector<bool>& valid) {
    int64_t n = 0, bad = 0;
    for (size_t i = 0; i < err.size(); ++i)
        if (valid[i]) {
            ++n;
            if (std::abs(err[i]) > 3.0 && std::abs(err[i]) > 0.05 * gt[i]) ++bad;
        }
    return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

inline double a95(const std::vector<double>& err, const std::vector<bool>& valid) {
    std::vector<double> e;
    for (size_t i = 0; i < err.size(); ++i)
        if (valid[i]) e.push_back(std::abs(err[i]));
    std::sort(e.begin(), e.end());
    const int64_t rank = static_cast<int64_t>(std::ceil(0.95 * static_cast<double>(e.size())));
    return e[static_cast<size_t>(std::max<int64_t>(rank, 1) - 1)];
}

} // namespace adcp::reference
