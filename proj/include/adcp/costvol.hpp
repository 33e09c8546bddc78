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

#include "adcp/ops.hpp"

namespace adcp {

/// Stage-1 full-range volume: slice d holds concat(left, right shifted right
/// by d); right samples that fall out of frame are zero.
template <typename S>
Tensor<S> build_full_volume(const Tensor<S>& left, const Tensor<S>& right, int d_levels) {
    check(left.ndim() == 3 && right.ndim() == 3, "build_full_volume: features must be [F,H,W]");
    detail::check_same_shape(left, right, "build_full_volume");
    const int f = left.dim(0), h = left.dim(1), w = left.dim(2);
    check(d_levels >= 1, "build_full_volume: need at least one disparity level");
    check(d_levels <= w, "build_full_volume: ", d_levels, " disparity levels exceed width ", w);

    auto r = detail::make_op_output<S>({2 * f, d_levels, h, w},
                                       left.requires_grad() || right.requires_grad());
    const S* lv = left.data().data();
    const S* rv = right.data().data();
    S* yv = r.out.data().data();
    const int64_t plane = int64_t(h) * w;
    for (int c = 0; c < f; ++c) {
        for (int d = 0; d < d_levels; ++d) {
            S* left_dst = yv + (int64_t(c) * d_levels + d) * plane;
            S* right_dst = yv + (int64_t(f + c) * d_levels + d) * plane;
            for (int y = 0; y < h; ++y) {
                const S* lrow = lv + (int64_t(c) * h + y) * w;
                const S* rrow = rv + (int64_t(c) * h + y) * w;
                S* ld = left_dst + int64_t(y) * w;
                S* rd = right_dst + int64_t(y) * w;
                for (int x = 0; x < w; ++x) {
                    ld[x] = lrow[x];
                    rd[x] = (x - d >= 0) ? rrow[x - d] : S(0);
                }
            }
        }
    }
    flops::add(static_cast<uint64_t>(r.out.numel()));
    if (r.recording) {
        auto ln = left.node(), rn = right.node(), yn = r.out.node();
        Tape<S>::active()->record([ln, rn, yn, f, d_levels, h, w, plane] {
            for (int c = 0; c < f; ++c) {
                for (int d = 0; d < d_levels; ++d) {
                    const S* gl = yn->grad.data() + (int64_t(c) * d_levels + d) * plane;
                    const S* gr = yn->grad.data() + (int64_t(f + c) * d_levels + d) * plane;
                    for (int y = 0; y < h; ++y) {
                        for (int x = 0; x < w; ++x) {
                            if (ln->requires_grad)
                                ln->grad[(int64_t(c) * h + y) * w + x] += gl[int64_t(y) * w + x];
                            if (rn->requires_grad && x - d >= 0)
                                rn->grad[(int64_t(c) * h + y) * w + x - d] +=
                                    gr[int64_t(y) * w + x];
                        }
                    }
                }
            }
        });
    }
    return r.out;
}

/// Horizontal backward warp: out(.,y,x) samples right at x - disp(y,x) with
/// linear interpolation along x, zero outside the frame. Differentiable in
/// both the features and the disparity.
template <typename S>
Tensor<S> warp_right(const Tensor<S>& right, const Tensor<S>& disp) {
    check(right.ndim() == 3, "warp_right: features must be [F,H,W], got ",
          to_string(right.shape()));
    check(disp.ndim() == 2 && disp.dim(0) == right.dim(1) && disp.dim(1) == right.dim(2),
          "warp_right: disparity ", to_string(disp.shape()), " does not match features ",
          to_string(right.shape()));
    const int f = right.dim(0), h = right.dim(1), w = right.dim(2);
    auto r = detail::make_op_output<S>({f, h, w}, right.requires_grad() || disp.requires_grad());
    const S* rv = right.data().data();
    const S* dv = disp.data().data();
    S* yv = r.out.data().data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double xs = x - static_cast<double>(dv[int64_t(y) * w + x]);
            const int x0 = static_cast<int>(std::floor(xs));
            const int x1 = x0 + 1;
            const S w1 = static_cast<S>(xs - x0);
            const S w0 = S(1) - w1;
            const bool in0 = x0 >= 0 && x0 < w;
            const bool in1 = x1 >= 0 && x1 < w;
            for (int c = 0; c < f; ++c) {
                const S* plane = rv + int64_t(c) * h * w + int64_t(y) * w;
                S v = S(0);
                if (in0) v += w0 * plane[x0];
                if (in1) v += w1 * plane[x1];
                yv[(int64_t(c) * h + y) * w + x] = v;
            }
        }
    }
    flops::add(4u * static_cast<uint64_t>(r.out.numel()));
    if (r.recording) {
        auto rn = right.node(), dn = disp.node(), yn = r.out.node();
        Tape<S>::active()->record([rn, dn, yn, f, h, w] {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double xs = x - static_cast<double>(dn->value[int64_t(y) * w + x]);
                    const int x0 = static_cast<int>(std::floor(xs));
                    const int x1 = x0 + 1;
                    const S w1 = static_cast<S>(xs - x0);
                    const S w0 = S(1) - w1;
                    const bool in0 = x0 >= 0 && x0 < w;
                    const bool in1 = x1 >= 0 && x1 < w;
                    S dd = S(0);
                    for (int c = 0; c < f; ++c) {
                        const int64_t base = int64_t(c) * h * w + int64_t(y) * w;
                        const S g = yn->grad[base + x];
                        if (rn->requires_grad) {
                            if (in0) rn->grad[base + x0] += g * w0;
                            if (in1) rn->grad[base + x1] += g * w1;
                        }
                        if (dn->requires_grad) {
                            // d(out)/d(disp) = sample(x0) - sample(x1)
                            const S v0 = in0 ? rn->value[base + x0] : S(0);
                            const S v1 = in1 ? rn->value[base + x1] : S(0);
                            dd += g * (v0 - v1);
                        }
                    }
                    if (dn->requires_grad) dn->grad[int64_t(y) * w + x] += dd;
                }
            }
        });
    }
    return r.out;
}

/// Stage-2 compact volume: candidate slice n holds
/// concat(left, warp_right(right, cands[n])), shape [2F, N, H, W].
/// Gradients reach the candidate field through the warp.
template <typename S>
Tensor<S> build_compact_volume(const Tensor<S>& left, const Tensor<S>& right,
                               const Tensor<S>& cands) {
    check(left.ndim() == 3 && right.ndim() == 3, "build_compact_volume: features must be [F,H,W]");
    detail::check_same_shape(left, right, "build_compact_volume");
    check(cands.ndim() == 3 && cands.dim(1) == left.dim(1) && cands.dim(2) == left.dim(2),
          "build_compact_volume: candidates ", to_string(cands.shape()),
          " do not match features ", to_string(left.shape()));
    const int f = left.dim(0), h = left.dim(1), w = left.dim(2);
    const int n = cands.dim(0);

    std::vector<Tensor<S>> warped;
    warped.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Tensor<S> ci = reshape(slice(cands, 0, i, 1), {h, w});
        warped.push_back(reshape(warp_right(right, ci), {f, 1, h, w}));
    }
    Tensor<S> right_part = concat(warped, 1);                      // [F,N,H,W]
    std::vector<Tensor<S>> lrep(static_cast<size_t>(n), reshape(left, {f, 1, h, w}));
    Tensor<S> left_part = concat(lrep, 1);                         // [F,N,H,W]
    return concat<S>({left_part, right_part}, 0);                  // [2F,N,H,W]
}

} // namespace adcp
