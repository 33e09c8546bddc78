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
#include <cstring>

#include <Eigen/Core>

#include "adcp/flops.hpp"
#include "adcp/tensor.hpp"

namespace adcp {

template <typename S>
using ArrayXMap = Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>;
template <typename S>
using ConstArrayXMap = Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>;

template <typename S>
ArrayXMap<S> as_array(Tensor<S>& t) {
    return ArrayXMap<S>(t.data().data(), t.numel());
}
template <typename S>
ConstArrayXMap<S> as_array(const Tensor<S>& t) {
    return ConstArrayXMap<S>(t.data().data(), t.numel());
}

namespace detail {

template <typename S>
void check_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
    check(a.shape() == b.shape(), op, ": shape mismatch ", to_string(a.shape()),
          " vs ", to_string(b.shape()));
}

/// Pointwise unary: y = f(a), dL/da += g * dfdx(a, y).
template <typename S, class F, class DF>
Tensor<S> unary_pointwise(const Tensor<S>& a, F f, DF dfdx) {
    auto r = make_op_output<S>(a.shape(), a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) yv[i] = f(av[i]);
    flops::add(static_cast<uint64_t>(n));
    if (r.recording) {
        auto an = a.node();
        auto yn = r.out.node();
        Tape<S>::active()->record([an, yn, dfdx] {
            const int64_t m = static_cast<int64_t>(an->value.size());
            for (int64_t i = 0; i < m; ++i)
                an->grad[i] += yn->grad[i] * dfdx(an->value[i], yn->value[i]);
        });
    }
    return r.out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    detail::check_same_shape(a, b, "add");
    auto r = detail::make_op_output<S>(a.shape(), a.requires_grad() || b.requires_grad());
    as_array(r.out) = as_array(a) + as_array(b);
    flops::add(static_cast<uint64_t>(a.numel()));
    if (r.recording) {
        auto an = a.node(), bn = b.node(), yn = r.out.node();
        Tape<S>::active()->record([an, bn, yn] {
            const int64_t n = static_cast<int64_t>(yn->grad.size());
            if (an->requires_grad)
                for (int64_t i = 0; i < n; ++i) an->grad[i] += yn->grad[i];
            if (bn->requires_grad)
                for (int64_t i = 0; i < n; ++i) bn->grad[i] += yn->grad[i];
        });
    }
    return r.out;
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    detail::check_same_shape(a, b, "sub");
    auto r = detail::make_op_output<S>(a.shape(), a.requires_grad() || b.requires_grad());
    as_array(r.out) = as_array(a) - as_array(b);
    flops::add(static_cast<uint64_t>(a.numel()));
    if (r.recording) {
        auto an = a.node(), bn = b.node(), yn = r.out.node();
        Tape<S>::active()->record([an, bn, yn] {
            const int64_t n = static_cast<int64_t>(yn->grad.size());
            if (an->requires_grad)
                for (int64_t i = 0; i < n; ++i) an->grad[i] += yn->grad[i];
            if (bn->requires_grad)
                for (int64_t i = 0; i < n; ++i) bn->grad[i] -= yn->grad[i];
        });
    }
    return r.out;
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
    detail::check_same_shape(a, b, "mul");
    auto r = detail::make_op_output<S>(a.shape(), a.requires_grad() || b.requires_grad());
    as_array(r.out) = as_array(a) * as_array(b);
    flops::add(static_cast<uint64_t>(a.numel()));
    if (r.recording) {
        auto an = a.node(), bn = b.node(), yn = r.out.node();
        Tape<S>::active()->record([an, bn, yn] {
            const int64_t n = static_cast<int64_t>(yn->grad.size());
            if (an->requires_grad)
                for (int64_t i = 0; i < n; ++i) an->grad[i] += yn->grad[i] * bn->value[i];
            if (bn->requires_grad)
                for (int64_t i = 0; i < n; ++i) bn->grad[i] += yn->grad[i] * an->value[i];
        });
    }
    return r.out;
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S s) {
    return detail::unary_pointwise(
        a, [s](S x) { return x * s; }, [s](S, S) { return s; });
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, S s) {
    return detail::unary_pointwise(
        a, [s](S x) { return x + s; }, [](S, S) { return S(1); });
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, S s) {
    return add(a, S(-s));
}

template <typename S>
Tensor<S> neg(const Tensor<S>& a) {
    return detail::unary_pointwise(
        a, [](S x) { return -x; }, [](S, S) { return S(-1); });
}

template <typename S>
Tensor<S> abs(const Tensor<S>& a) {
    return detail::unary_pointwise(
        a, [](S x) { return std::abs(x); },
        [](S x, S) { return x > S(0) ? S(1) : (x < S(0) ? S(-1) : S(0)); });
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
    return detail::unary_pointwise(
        a, [](S x) { return x > S(0) ? x : S(0); },
        [](S x, S) { return x > S(0) ? S(1) : S(0); });
}

template <typename S>
Tensor<S> leaky_relu(const Tensor<S>& a, S slope = S(0.1)) {
    return detail::unary_pointwise(
        a, [slope](S x) { return x > S(0) ? x : slope * x; },
        [slope](S x, S) { return x > S(0) ? S(1) : slope; });
}

template <typename S>
Tensor<S> clamp(const Tensor<S>& a, S lo, S hi) {
    return detail::unary_pointwise(
        a, [lo, hi](S x) { return std::min(std::max(x, lo), hi); },
        [lo, hi](S x, S) { return (x >= lo && x <= hi) ? S(1) : S(0); });
}

/// Elementwise smooth-L1: 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
template <typename S>
Tensor<S> smooth_l1(const Tensor<S>& a) {
    return detail::unary_pointwise(
        a,
        [](S x) { return std::abs(x) < S(1) ? S(0.5) * x * x : std::abs(x) - S(0.5); },
        [](S x, S) { return std::abs(x) < S(1) ? x : (x > S(0) ? S(1) : S(-1)); });
}

template <typename S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) { return add(a, b); }
template <typename S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) { return sub(a, b); }
template <typename S>
Tensor<S> operator*(const Tensor<S>& a, const Tensor<S>& b) { return mul(a, b); }
template <typename S>
Tensor<S> operator*(const Tensor<S>& a, S s) { return scale(a, s); }
template <typename S>
Tensor<S> operator-(const Tensor<S>& a) { return neg(a); }

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
    auto r = detail::make_op_output<S>({1}, a.requires_grad());
    r.out.data()[0] = as_array(a).sum();
    flops::add(static_cast<uint64_t>(a.numel()));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn] {
            const S g = yn->grad[0];
            for (S& ag : an->grad) ag += g;
        });
    }
    return r.out;
}

namespace detail {
template <typename S>
void axis_extents(const Tensor<S>& a, int axis, int64_t& outer, int64_t& n, int64_t& inner) {
    check(axis >= 0 && axis < a.ndim(), "axis ", axis, " out of range for shape ",
          to_string(a.shape()));
    outer = 1;
    inner = 1;
    for (int d = 0; d < axis; ++d) outer *= a.dim(d);
    n = a.dim(axis);
    for (int d = axis + 1; d < a.ndim(); ++d) inner *= a.dim(d);
}
} // namespace detail

template <typename S>
Tensor<S> reduce_sum(const Tensor<S>& a, int axis) {
    int64_t outer, n, inner;
    detail::axis_extents(a, axis, outer, n, inner);
    Shape out_shape;
    for (int d = 0; d < a.ndim(); ++d)
        if (d != axis) out_shape.push_back(a.dim(d));
    if (out_shape.empty()) out_shape = {1};
    auto r = detail::make_op_output<S>(out_shape, a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < inner; ++j)
                yv[o * inner + j] += av[(o * n + i) * inner + j];
    flops::add(static_cast<uint64_t>(a.numel()));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, outer, n, inner] {
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t i = 0; i < n; ++i)
                    for (int64_t j = 0; j < inner; ++j)
                        an->grad[(o * n + i) * inner + j] += yn->grad[o * inner + j];
        });
    }
    return r.out;
}

// ---------------------------------------------------------------------------
// Softmax
// ---------------------------------------------------------------------------

/// Max-subtracted softmax along `axis`; outputs are positive and sum to one.
template <typename S>
Tensor<S> softmax(const Tensor<S>& a, int axis) {
    int64_t outer, n, inner;
    detail::axis_extents(a, axis, outer, n, inner);
    auto r = detail::make_op_output<S>(a.shape(), a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    for (int64_t o = 0; o < outer; ++o) {
        for (int64_t j = 0; j < inner; ++j) {
            const int64_t base = o * n * inner + j;
            S mx = av[base];
            for (int64_t i = 1; i < n; ++i) mx = std::max(mx, av[base + i * inner]);
            S total = S(0);
            for (int64_t i = 0; i < n; ++i) {
                const S e = std::exp(av[base + i * inner] - mx);
                yv[base + i * inner] = e;
                total += e;
            }
            const S norm = S(1) / total;
            for (int64_t i = 0; i < n; ++i) yv[base + i * inner] *= norm;
        }
    }
    flops::add(5u * static_cast<uint64_t>(a.numel()));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, outer, n, inner] {
            for (int64_t o = 0; o < outer; ++o) {
                for (int64_t j = 0; j < inner; ++j) {
                    const int64_t base = o * n * inner + j;
                    S dot = S(0);
                    for (int64_t i = 0; i < n; ++i)
                        dot += yn->grad[base + i * inner] * yn->value[base + i * inner];
                    for (int64_t i = 0; i < n; ++i)
                        an->grad[base + i * inner] +=
                            yn->value[base + i * inner] * (yn->grad[base + i * inner] - dot);
                }
            }
        });
    }
    return r.out;
}

// ---------------------------------------------------------------------------
// Data movement: reshape / concat / slice / repeat / pad
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, Shape shape) {
    check(adcp::numel(shape) == a.numel(), "reshape ", to_string(a.shape()), " -> ",
          to_string(shape), " changes element count");
    auto r = detail::make_op_output<S>(std::move(shape), a.requires_grad());
    std::copy(a.data().begin(), a.data().end(), r.out.data().begin());
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn] {
            const int64_t n = static_cast<int64_t>(yn->grad.size());
            for (int64_t i = 0; i < n; ++i) an->grad[i] += yn->grad[i];
        });
    }
    return r.out;
}

template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& ts, int axis) {
    check(!ts.empty(), "concat of zero tensors");
    const int nd = ts[0].ndim();
    check(axis >= 0 && axis < nd, "concat axis ", axis, " out of range");
    int total_axis = 0;
    bool any_grad = false;
    for (const auto& t : ts) {
        check(t.ndim() == nd, "concat rank mismatch");
        for (int d = 0; d < nd; ++d)
            check(d == axis || t.dim(d) == ts[0].dim(d), "concat: extent mismatch at axis ", d,
                  ": ", to_string(t.shape()), " vs ", to_string(ts[0].shape()));
        total_axis += t.dim(axis);
        any_grad = any_grad || t.requires_grad();
    }
    Shape out_shape = ts[0].shape();
    out_shape[static_cast<size_t>(axis)] = total_axis;

    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= ts[0].dim(d);
    for (int d = axis + 1; d < nd; ++d) inner *= ts[0].dim(d);

    auto r = detail::make_op_output<S>(out_shape, any_grad);
    S* yv = r.out.data().data();
    int64_t off = 0;
    for (const auto& t : ts) {
        const int64_t na = t.dim(axis);
        const S* tv = t.data().data();
        for (int64_t o = 0; o < outer; ++o)
            std::memcpy(yv + (o * total_axis + off) * inner, tv + o * na * inner,
                        static_cast<size_t>(na * inner) * sizeof(S));
        off += na;
    }
    if (r.recording) {
        std::vector<std::shared_ptr<detail::Node<S>>> srcs;
        srcs.reserve(ts.size());
        for (const auto& t : ts) srcs.push_back(t.node());
        auto yn = r.out.node();
        const int64_t ta = total_axis;
        Tape<S>::active()->record([srcs, yn, outer, inner, ta, axis] {
            int64_t off2 = 0;
            for (const auto& sn : srcs) {
                const int64_t na = sn->shape[static_cast<size_t>(axis)];
                if (sn->requires_grad) {
                    for (int64_t o = 0; o < outer; ++o)
                        for (int64_t k = 0; k < na * inner; ++k)
                            sn->grad[o * na * inner + k] +=
                                yn->grad[(o * ta + off2) * inner + k];
                }
                off2 += na;
            }
        });
    }
    return r.out;
}

template <typename S>
Tensor<S> slice(const Tensor<S>& a, int axis, int start, int len) {
    int64_t outer, n, inner;
    detail::axis_extents(a, axis, outer, n, inner);
    check(start >= 0 && len >= 1 && start + len <= n, "slice [", start, ",", start + len,
          ") out of range for axis extent ", n);
    Shape out_shape = a.shape();
    out_shape[static_cast<size_t>(axis)] = len;
    auto r = detail::make_op_output<S>(out_shape, a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    for (int64_t o = 0; o < outer; ++o)
        std::memcpy(yv + o * len * inner, av + (o * n + start) * inner,
                    static_cast<size_t>(len * inner) * sizeof(S));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, outer, n, inner, start, len] {
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t k = 0; k < len * inner; ++k)
                    an->grad[(o * n + start) * inner + k] += yn->grad[o * len * inner + k];
        });
    }
    return r.out;
}

/// Replicates `a` n times along a new leading axis.
template <typename S>
Tensor<S> repeat0(const Tensor<S>& a, int n) {
    check(n >= 1, "repeat0 needs n >= 1");
    Shape out_shape;
    out_shape.push_back(n);
    for (int d = 0; d < a.ndim(); ++d) out_shape.push_back(a.dim(d));
    auto r = detail::make_op_output<S>(out_shape, a.requires_grad());
    const int64_t m = a.numel();
    S* yv = r.out.data().data();
    for (int i = 0; i < n; ++i)
        std::memcpy(yv + int64_t(i) * m, a.data().data(), static_cast<size_t>(m) * sizeof(S));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, n, m] {
            for (int i = 0; i < n; ++i)
                for (int64_t k = 0; k < m; ++k) an->grad[k] += yn->grad[int64_t(i) * m + k];
        });
    }
    return r.out;
}

/// Zero-pads the last two axes.
template <typename S>
Tensor<S> pad_last2(const Tensor<S>& a, int top, int bottom, int left, int right) {
    check(a.ndim() >= 2, "pad_last2 needs rank >= 2");
    check(top >= 0 && bottom >= 0 && left >= 0 && right >= 0, "negative padding");
    const int h = a.dim(a.ndim() - 2), w = a.dim(a.ndim() - 1);
    const int oh = h + top + bottom, ow = w + left + right;
    Shape out_shape = a.shape();
    out_shape[out_shape.size() - 2] = oh;
    out_shape[out_shape.size() - 1] = ow;
    const int64_t ch = a.numel() / (int64_t(h) * w);
    auto r = detail::make_op_output<S>(out_shape, a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    for (int64_t c = 0; c < ch; ++c)
        for (int y = 0; y < h; ++y)
            std::memcpy(yv + (c * oh + y + top) * ow + left, av + (c * h + y) * int64_t(w),
                        static_cast<size_t>(w) * sizeof(S));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, ch, h, w, oh, ow, top, left] {
            for (int64_t c = 0; c < ch; ++c)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x)
                        an->grad[(c * h + y) * w + x] +=
                            yn->grad[(c * oh + y + top) * ow + x + left];
        });
    }
    return r.out;
}

/// Extracts a window of the last two axes (inverse of pad_last2).
template <typename S>
Tensor<S> crop_last2(const Tensor<S>& a, int top, int left, int oh, int ow) {
    check(a.ndim() >= 2, "crop_last2 needs rank >= 2");
    const int h = a.dim(a.ndim() - 2), w = a.dim(a.ndim() - 1);
    check(top >= 0 && left >= 0 && top + oh <= h && left + ow <= w,
          "crop window out of range");
    Shape out_shape = a.shape();
    out_shape[out_shape.size() - 2] = oh;
    out_shape[out_shape.size() - 1] = ow;
    const int64_t ch = a.numel() / (int64_t(h) * w);
    auto r = detail::make_op_output<S>(out_shape, a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    for (int64_t c = 0; c < ch; ++c)
        for (int y = 0; y < oh; ++y)
            std::memcpy(yv + (c * oh + y) * int64_t(ow), av + (c * h + y + top) * int64_t(w) + left,
                        static_cast<size_t>(ow) * sizeof(S));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, ch, h, w, oh, ow, top, left] {
            for (int64_t c = 0; c < ch; ++c)
                for (int y = 0; y < oh; ++y)
                    for (int x = 0; x < ow; ++x)
                        an->grad[(c * h + y + top) * w + x + left] +=
                            yn->grad[(c * oh + y) * ow + x];
        });
    }
    return r.out;
}

// ---------------------------------------------------------------------------
// Bilinear resize (align-corners)
// ---------------------------------------------------------------------------

namespace detail {
struct LerpIndex {
    int i0, i1;
    double w1;  // weight of i1; i0 gets 1-w1
};

inline std::vector<LerpIndex> align_corners_axis(int in, int out) {
    std::vector<LerpIndex> v(static_cast<size_t>(out));
    for (int o = 0; o < out; ++o) {
        double src = (out == 1) ? 0.0
                                : static_cast<double>(o) * (in - 1) / static_cast<double>(out - 1);
        int i0 = static_cast<int>(std::floor(src));
        if (i0 >= in - 1) i0 = in - 2;
        if (in == 1) i0 = 0;
        const int i1 = std::min(i0 + 1, in - 1);
        v[static_cast<size_t>(o)] = {std::max(i0, 0), i1, src - std::max(i0, 0)};
    }
    return v;
}
} // namespace detail

/// Align-corners bilinear resize of the last two axes: corner samples map to
/// corner samples exactly, interior samples interpolate linearly.
template <typename S>
Tensor<S> bilinear_resize(const Tensor<S>& a, int out_h, int out_w) {
    check(a.ndim() >= 2, "bilinear_resize needs rank >= 2");
    check(out_h >= 1 && out_w >= 1, "resize target must be >= 1");
    const int h = a.dim(a.ndim() - 2), w = a.dim(a.ndim() - 1);
    if (out_h == h && out_w == w) {
        // Identity size keeps bits identical.
        return reshape(a, a.shape());
    }
    Shape out_shape = a.shape();
    out_shape[out_shape.size() - 2] = out_h;
    out_shape[out_shape.size() - 1] = out_w;
    const int64_t ch = a.numel() / (int64_t(h) * w);
    auto ys = detail::align_corners_axis(h, out_h);
    auto xs = detail::align_corners_axis(w, out_w);
    auto r = detail::make_op_output<S>(out_shape, a.requires_grad());
    const S* av = a.data().data();
    S* yv = r.out.data().data();
    for (int64_t c = 0; c < ch; ++c) {
        const S* plane = av + c * h * w;
        S* out_plane = yv + c * int64_t(out_h) * out_w;
        for (int oy = 0; oy < out_h; ++oy) {
            const auto& ly = ys[static_cast<size_t>(oy)];
            for (int ox = 0; ox < out_w; ++ox) {
                const auto& lx = xs[static_cast<size_t>(ox)];
                const double v00 = plane[ly.i0 * w + lx.i0];
                const double v01 = plane[ly.i0 * w + lx.i1];
                const double v10 = plane[ly.i1 * w + lx.i0];
                const double v11 = plane[ly.i1 * w + lx.i1];
                const double top = v00 + (v01 - v00) * lx.w1;
                const double bot = v10 + (v11 - v10) * lx.w1;
                out_plane[oy * int64_t(out_w) + ox] = static_cast<S>(top + (bot - top) * ly.w1);
            }
        }
    }
    flops::add(8u * static_cast<uint64_t>(r.out.numel()));
    if (r.recording) {
        auto an = a.node(), yn = r.out.node();
        Tape<S>::active()->record([an, yn, ch, h, w, out_h, out_w, ys, xs] {
            for (int64_t c = 0; c < ch; ++c) {
                S* gplane = an->grad.data() + c * h * w;
                const S* gout = yn->grad.data() + c * int64_t(out_h) * out_w;
                for (int oy = 0; oy < out_h; ++oy) {
                    const auto& ly = ys[static_cast<size_t>(oy)];
                    for (int ox = 0; ox < out_w; ++ox) {
                        const auto& lx = xs[static_cast<size_t>(ox)];
                        const S g = gout[oy * int64_t(out_w) + ox];
                        const S wy1 = static_cast<S>(ly.w1), wy0 = S(1) - wy1;
                        const S wx1 = static_cast<S>(lx.w1), wx0 = S(1) - wx1;
                        gplane[ly.i0 * w + lx.i0] += g * wy0 * wx0;
                        gplane[ly.i0 * w + lx.i1] += g * wy0 * wx1;
                        gplane[ly.i1 * w + lx.i0] += g * wy1 * wx0;
                        gplane[ly.i1 * w + lx.i1] += g * wy1 * wx1;
                    }
                }
            }
        });
    }
    return r.out;
}

} // namespace adcp
