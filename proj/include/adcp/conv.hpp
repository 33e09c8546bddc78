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

#include <memory>

#include <Eigen/Core>

#include "adcp/flops.hpp"
#include "adcp/ops.hpp"
#include "adcp/tensor.hpp"

namespace adcp {

// Cross-correlation convention (no kernel flip), zero padding. The forward
// path lowers the input to a [K x P] patch matrix and runs one Eigen GEMM;
// tests hold it to the nested-loop reference within 1e-6.

namespace detail {

template <typename S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Floor convention: out = floor((in + 2*pad - k) / stride) + 1. An empty
// output extent is an error.
inline int conv_extent(int in, int k, int stride, int pad, const char* axis) {
    const int span = in + 2 * pad - k;
    check(span >= 0, "conv: kernel ", k, " larger than padded ", axis, " extent ", in + 2 * pad);
    return span / stride + 1;
}

// input [Cin,H,W] -> col [Cin*kh*kw, oh*ow]
template <typename S>
void im2col_2d(const S* in, int cin, int h, int w, int kh, int kw, int stride, int pad,
               int oh, int ow, S* col) {
    const int64_t p = int64_t(oh) * ow;
    int64_t k = 0;
    for (int c = 0; c < cin; ++c) {
        for (int dy = 0; dy < kh; ++dy) {
            for (int dx = 0; dx < kw; ++dx, ++k) {
                S* row = col + k * p;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + dy - pad;
                    if (iy < 0 || iy >= h) {
                        for (int ox = 0; ox < ow; ++ox) row[oy * int64_t(ow) + ox] = S(0);
                        continue;
                    }
                    const S* src = in + (int64_t(c) * h + iy) * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + dx - pad;
                        row[oy * int64_t(ow) + ox] = (ix >= 0 && ix < w) ? src[ix] : S(0);
                    }
                }
            }
        }
    }
}

template <typename S>
void col2im_2d(const S* col, int cin, int h, int w, int kh, int kw, int stride, int pad,
               int oh, int ow, S* din) {
    const int64_t p = int64_t(oh) * ow;
    int64_t k = 0;
    for (int c = 0; c < cin; ++c) {
        for (int dy = 0; dy < kh; ++dy) {
            for (int dx = 0; dx < kw; ++dx, ++k) {
                const S* row = col + k * p;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + dy - pad;
                    if (iy < 0 || iy >= h) continue;
                    S* dst = din + (int64_t(c) * h + iy) * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + dx - pad;
                        if (ix >= 0 && ix < w) dst[ix] += row[oy * int64_t(ow) + ox];
                    }
                }
            }
        }
    }
}

// input [Cin,D,H,W] -> col [Cin*kd*kh*kw, od*oh*ow]
template <typename S>
void im2col_3d(const S* in, int cin, int d, int h, int w, int kd, int kh, int kw, int stride,
               int pad, int od, int oh, int ow, S* col) {
    const int64_t p = int64_t(od) * oh * ow;
    int64_t k = 0;
    for (int c = 0; c < cin; ++c) {
        for (int dz = 0; dz < kd; ++dz) {
            for (int dy = 0; dy < kh; ++dy) {
                for (int dx = 0; dx < kw; ++dx, ++k) {
                    S* row = col + k * p;
                    for (int oz = 0; oz < od; ++oz) {
                        const int iz = oz * stride + dz - pad;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * stride + dy - pad;
                            S* out = row + (int64_t(oz) * oh + oy) * ow;
                            if (iz < 0 || iz >= d || iy < 0 || iy >= h) {
                                for (int ox = 0; ox < ow; ++ox) out[ox] = S(0);
                                continue;
                            }
                            const S* src = in + ((int64_t(c) * d + iz) * h + iy) * w;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * stride + dx - pad;
                                out[ox] = (ix >= 0 && ix < w) ? src[ix] : S(0);
                            }
                        }
                    }
                }
            }
        }
    }
}

template <typename S>
void col2im_3d(const S* col, int cin, int d, int h, int w, int kd, int kh, int kw, int stride,
               int pad, int od, int oh, int ow, S* din) {
    const int64_t p = int64_t(od) * oh * ow;
    int64_t k = 0;
    for (int c = 0; c < cin; ++c) {
        for (int dz = 0; dz < kd; ++dz) {
            for (int dy = 0; dy < kh; ++dy) {
                for (int dx = 0; dx < kw; ++dx, ++k) {
                    const S* row = col + k * p;
                    for (int oz = 0; oz < od; ++oz) {
                        const int iz = oz * stride + dz - pad;
                        if (iz < 0 || iz >= d) continue;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * stride + dy - pad;
                            if (iy < 0 || iy >= h) continue;
                            const S* g = row + (int64_t(oz) * oh + oy) * ow;
                            S* dst = din + ((int64_t(c) * d + iz) * h + iy) * w;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * stride + dx - pad;
                                if (ix >= 0 && ix < w) dst[ix] += g[ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

} // namespace detail

template <typename S>
Tensor<S> conv2d(const Tensor<S>& input, const Tensor<S>& weight, const Tensor<S>& bias,
                 int stride = 1, int pad = 0) {
    check(input.ndim() == 3, "conv2d: input must be [C,H,W], got ", to_string(input.shape()));
    check(weight.ndim() == 4, "conv2d: weight must be [Cout,Cin,kh,kw], got ",
          to_string(weight.shape()));
    const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    check(weight.dim(1) == cin, "conv2d: channel mismatch, input ", to_string(input.shape()),
          " vs weight ", to_string(weight.shape()));
    check(kh % 2 == 1 && kw % 2 == 1, "conv2d: kernel extents must be odd, got ", kh, "x", kw);
    check(bias.ndim() == 1 && bias.dim(0) == cout, "conv2d: bias must be [Cout]");
    check(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
    const int oh = detail::conv_extent(h, kh, stride, pad, "H");
    const int ow = detail::conv_extent(w, kw, stride, pad, "W");

    const int64_t k = int64_t(cin) * kh * kw;
    const int64_t p = int64_t(oh) * ow;
    auto col = std::make_shared<std::vector<S>>(static_cast<size_t>(k * p));
    detail::im2col_2d(input.data().data(), cin, h, w, kh, kw, stride, pad, oh, ow, col->data());

    const bool needs_grad = input.requires_grad() || weight.requires_grad() || bias.requires_grad();
    auto r = detail::make_op_output<S>({cout, oh, ow}, needs_grad);
    {
        detail::ConstMatMap<S> wm(weight.data().data(), cout, k);
        detail::ConstMatMap<S> cm(col->data(), k, p);
        detail::MatMap<S> om(r.out.data().data(), cout, p);
        om.noalias() = wm * cm;
        const S* bv = bias.data().data();
        for (int c = 0; c < cout; ++c) om.row(c).array() += bv[c];
    }
    flops::add(static_cast<uint64_t>(2 * cout * k * p + cout * p));

    if (r.recording) {
        auto in_n = input.node();
        auto w_n = weight.node();
        auto b_n = bias.node();
        auto y_n = r.out.node();
        Tape<S>::active()->record([=] {
            detail::ConstMatMap<S> gom(y_n->grad.data(), cout, p);
            if (b_n->requires_grad) {
                for (int c = 0; c < cout; ++c) b_n->grad[static_cast<size_t>(c)] += gom.row(c).sum();
            }
            if (w_n->requires_grad) {
                detail::ConstMatMap<S> cm(col->data(), k, p);
                detail::MatMap<S> gwm(w_n->grad.data(), cout, k);
                gwm.noalias() += gom * cm.transpose();
            }
            if (in_n->requires_grad) {
                std::vector<S> dcol(static_cast<size_t>(k * p));
                detail::ConstMatMap<S> wm(w_n->value.data(), cout, k);
                detail::MatMap<S> dcm(dcol.data(), k, p);
                dcm.noalias() = wm.transpose() * gom;
                detail::col2im_2d(dcol.data(), cin, h, w, kh, kw, stride, pad, oh, ow,
                                  in_n->grad.data());
            }
        });
    }
    return r.out;
}

template <typename S>
Tensor<S> conv3d(const Tensor<S>& input, const Tensor<S>& weight, const Tensor<S>& bias,
                 int stride = 1, int pad = 0) {
    check(input.ndim() == 4, "conv3d: input must be [C,D,H,W], got ", to_string(input.shape()));
    check(weight.ndim() == 5, "conv3d: weight must be [Cout,Cin,kd,kh,kw], got ",
          to_string(weight.shape()));
    const int cin = input.dim(0), d = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int cout = weight.dim(0), kd = weight.dim(2), kh = weight.dim(3), kw = weight.dim(4);
    check(weight.dim(1) == cin, "conv3d: channel mismatch, input ", to_string(input.shape()),
          " vs weight ", to_string(weight.shape()));
    check(kd % 2 == 1 && kh % 2 == 1 && kw % 2 == 1, "conv3d: kernel extents must be odd");
    check(bias.ndim() == 1 && bias.dim(0) == cout, "conv3d: bias must be [Cout]");
    check(stride >= 1 && pad >= 0, "conv3d: bad stride/pad");
    const int od = detail::conv_extent(d, kd, stride, pad, "D");
    const int oh = detail::conv_extent(h, kh, stride, pad, "H");
    const int ow = detail::conv_extent(w, kw, stride, pad, "W");

    const int64_t k = int64_t(cin) * kd * kh * kw;
    const int64_t p = int64_t(od) * oh * ow;
    auto col = std::make_shared<std::vector<S>>(static_cast<size_t>(k * p));
    detail::im2col_3d(input.data().data(), cin, d, h, w, kd, kh, kw, stride, pad, od, oh, ow,
                      col->data());

    const bool needs_grad = input.requires_grad() || weight.requires_grad() || bias.requires_grad();
    auto r = detail::make_op_output<S>({cout, od, oh, ow}, needs_grad);
    {
        detail::ConstMatMap<S> wm(weight.data().data(), cout, k);
        detail::ConstMatMap<S> cm(col->data(), k, p);
        detail::MatMap<S> om(r.out.data().data(), cout, p);
        om.noalias() = wm * cm;
        const S* bv = bias.data().data();
        for (int c = 0; c < cout; ++c) om.row(c).array() += bv[c];
    }
    flops::add(static_cast<uint64_t>(2 * cout * k * p + cout * p));

    if (r.recording) {
        auto in_n = input.node();
        auto w_n = weight.node();
        auto b_n = bias.node();
        auto y_n = r.out.node();
        Tape<S>::active()->record([=] {
            detail::ConstMatMap<S> gom(y_n->grad.data(), cout, p);
            if (b_n->requires_grad) {
                for (int c = 0; c < cout; ++c) b_n->grad[static_cast<size_t>(c)] += gom.row(c).sum();
            }
            if (w_n->requires_grad) {
                detail::ConstMatMap<S> cm(col->data(), k, p);
                detail::MatMap<S> gwm(w_n->grad.data(), cout, k);
                gwm.noalias() += gom * cm.transpose();
            }
            if (in_n->requires_grad) {
                std::vector<S> dcol(static_cast<size_t>(k * p));
                detail::ConstMatMap<S> wm(w_n->value.data(), cout, k);
                detail::MatMap<S> dcm(dcol.data(), k, p);
                dcm.noalias() = wm.transpose() * gom;
                detail::col2im_3d(dcol.data(), cin, d, h, w, kd, kh, kw, stride, pad, od, oh, ow,
                                  in_n->grad.data());
            }
        });
    }
    return r.out;
}

} // namespace adcp
