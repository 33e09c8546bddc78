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
#include <array>
#include <cmath>
#include <vector>

#include "adcp/ops.hpp"

namespace adcp {

// Validity masks are [H,W] tensors holding 0/1; a pixel is valid iff > 0.5.

template <typename S>
int64_t count_valid(const Tensor<S>& mask) {
    int64_t p = 0;
    for (S v : mask.data()) p += v > S(0.5) ? 1 : 0;
    return p;
}

/// Soft-argmin over a full-range cost map: d_hat = sum_d d * softmax(-cost)_d.
/// Output lies in [0, D-1].
template <typename S>
Tensor<S> soft_argmin_full(const Tensor<S>& costs) {
    check(costs.ndim() == 3, "soft_argmin_full: costs must be [D,H,W], got ",
          to_string(costs.shape()));
    const int d = costs.dim(0), h = costs.dim(1), w = costs.dim(2);
    Tensor<S> ramp = Tensor<S>::zeros({d, h, w});
    S* rv = ramp.data().data();
    for (int i = 0; i < d; ++i)
        for (int64_t j = 0; j < int64_t(h) * w; ++j) rv[int64_t(i) * h * w + j] = static_cast<S>(i);
    Tensor<S> prob = softmax(neg(costs), 0);
    return reduce_sum(mul(prob, ramp), 0);
}

/// Soft-argmin over per-pixel candidates: d_hat = sum_n cands_n *
/// softmax(-cost)_n. Output lies in the per-pixel candidate hull.
template <typename S>
Tensor<S> soft_argmin_candidates(const Tensor<S>& costs, const Tensor<S>& cands) {
    detail::check_same_shape(costs, cands, "soft_argmin_candidates");
    check(costs.ndim() == 3, "soft_argmin_candidates: costs must be [N,H,W]");
    Tensor<S> prob = softmax(neg(costs), 0);
    return reduce_sum(mul(prob, cands), 0);
}

/// Scalar smooth-L1: 0.5 x^2 if |x| < 1, |x| - 0.5 otherwise.
inline double smooth_l1(double x) {
    return std::abs(x) < 1.0 ? 0.5 * x * x : std::abs(x) - 0.5;
}

struct LossWeights {
    double l11 = 0.25;
    double l12 = 0.5;
    double l21 = 0.5;
    double l22 = 1.0;
};

/// Masked multi-output smooth-L1 loss over the four supervision heads, all at
/// ground-truth resolution: sum_si (lambda_si / P) sum_valid smooth_l1(gt - d_si).
template <typename S>
Tensor<S> total_loss(const std::array<Tensor<S>, 4>& outputs, const Tensor<S>& gt,
                     const Tensor<S>& mask, const LossWeights& w = {}) {
    const int64_t p = count_valid(mask);
    check(p > 0, "total_loss: validity mask has no valid pixels");
    const std::array<double, 4> lambdas = {w.l11, w.l12, w.l21, w.l22};
    Tensor<S> loss;
    for (size_t i = 0; i < 4; ++i) {
        detail::check_same_shape(outputs[i], gt, "total_loss");
        Tensor<S> term = scale(sum(mul(smooth_l1(sub(gt, outputs[i])), mask)),
                               static_cast<S>(lambdas[i] / static_cast<double>(p)));
        loss = i == 0 ? term : add(loss, term);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Evaluation metrics (scalar results, computed in double)
// ---------------------------------------------------------------------------

namespace detail {
template <typename S>
std::vector<double> masked_abs_errors(const Tensor<S>& pred, const Tensor<S>& gt,
                                      const Tensor<S>& mask) {
    check_same_shape(pred, gt, "metrics");
    check_same_shape(pred, mask, "metrics");
    std::vector<double> errs;
    errs.reserve(static_cast<size_t>(pred.numel()));
    const S* pv = pred.data().data();
    const S* gv = gt.data().data();
    const S* mv = mask.data().data();
    for (int64_t i = 0; i < pred.numel(); ++i)
        if (mv[i] > S(0.5))
            errs.push_back(std::abs(static_cast<double>(pv[i]) - static_cast<double>(gv[i])));
    check(!errs.empty(), "metrics: validity mask has no valid pixels");
    return errs;
}
} // namespace detail

/// Mean absolute disparity error in pixels.
template <typename S>
double metric_epe(const Tensor<S>& pred, const Tensor<S>& gt, const Tensor<S>& mask) {
    const auto errs = detail::masked_abs_errors(pred, gt, mask);
    double s = 0.0;
    for (double e : errs) s += e;
    return s / static_cast<double>(errs.size());
}

/// Percentage of valid pixels with |error| > t.
template <typename S>
double metric_px(const Tensor<S>& pred, const Tensor<S>& gt, const Tensor<S>& mask, double t) {
    const auto errs = detail::masked_abs_errors(pred, gt, mask);
    int64_t bad = 0;
    for (double e : errs) bad += e > t ? 1 : 0;
    return 100.0 * static_cast<double>(bad) / static_cast<double>(errs.size());
}

/// Percentage of valid pixels whose error exceeds both 3 px and 5% of the
/// ground-truth disparity.
template <typename S>
double metric_d1(const Tensor<S>& pred, const Tensor<S>& gt, const Tensor<S>& mask) {
    detail::check_same_shape(pred, gt, "metric_d1");
    const S* pv = pred.data().data();
    const S* gv = gt.data().data();
    const S* mv = mask.data().data();
    int64_t valid = 0, bad = 0;
    for (int64_t i = 0; i < pred.numel(); ++i) {
        if (mv[i] <= S(0.5)) continue;
        ++valid;
        const double e = std::abs(static_cast<double>(pv[i]) - static_cast<double>(gv[i]));
        if (e > 3.0 && e > 0.05 * static_cast<double>(gv[i])) ++bad;
    }
    check(valid > 0, "metric_d1: validity mask has no valid pixels");
    return 100.0 * static_cast<double>(bad) / static_cast<double>(valid);
}

/// Largest error among the best 95% of valid pixels (nearest-rank).
template <typename S>
double metric_a95(const Tensor<S>& pred, const Tensor<S>& gt, const Tensor<S>& mask) {
    auto errs = detail::masked_abs_errors(pred, gt, mask);
    std::sort(errs.begin(), errs.end());
    const auto p = static_cast<double>(errs.size());
    const int64_t rank = static_cast<int64_t>(std::ceil(0.95 * p));
    return errs[static_cast<size_t>(std::max<int64_t>(rank, 1) - 1)];
}

struct Metrics {
    double epe = 0.0;
    double d1 = 0.0;
    double px2 = 0.0;
    double px3 = 0.0;
    double a95 = 0.0;
};

template <typename S>
Metrics compute_metrics(const Tensor<S>& pred, const Tensor<S>& gt, const Tensor<S>& mask) {
    Metrics m;
    m.epe = metric_epe(pred, gt, mask);
    m.d1 = metric_d1(pred, gt, mask);
    m.px2 = metric_px(pred, gt, mask, 2.0);
    m.px3 = metric_px(pred, gt, mask, 3.0);
    m.a95 = metric_a95(pred, gt, mask);
    return m;
}

} // namespace adcp
