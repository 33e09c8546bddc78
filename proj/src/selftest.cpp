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

#include "adcp/selftest.hpp"

#include <chrono>
#include <iomanip>

#include "adcp/gradcheck.hpp"
#include "adcp/pipeline.hpp"
#include "adcp/reference.hpp"

namespace adcp::selftest {

namespace {

using T = Tensor<double>;

T rand_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    T t = T::zeros(std::move(shape));
    for (auto& v : t.data()) v = rand_uniform(rng, lo, hi);
    return t;
}

double max_abs_diff(const T& a, const T& b) {
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

Check make_check(const std::string& name, const std::string& group, bool pass, double value) {
    Check c;
    c.name = name;
    c.group = group;
    c.pass = pass;
    c.detail = cat("max_err=", value);
    return c;
}

void gradient_checks(std::vector<Check>& out, double corruption) {
    Rng rng(2024);
    const double tol = 1e-4;
    auto add_grad_check = [&](const std::string& name, double err) {
        out.push_back(make_check("grad: " + name, "grad", err < tol, err));
    };
    // Fixed weighting makes any op output a non-degenerate scalar while the
    // checked function stays deterministic across perturbed evaluations.
    auto scalarize = [&](auto op, Shape out_shape) {
        T w = rand_tensor(rng, std::move(out_shape), 0.2, 1.0);
        return [op, w](const T& x) { return sum(mul(op(x), w)); };
    };

    {
        T b = rand_tensor(rng, {3, 4});
        add_grad_check("add", finite_diff_check(
                                  scalarize([b](const T& x) { return add(x, b); }, {3, 4}),
                                  rand_tensor(rng, {3, 4})));
        add_grad_check("sub", finite_diff_check(
                                  scalarize([b](const T& x) { return sub(x, b); }, {3, 4}),
                                  rand_tensor(rng, {3, 4})));
        add_grad_check("mul", finite_diff_check(
                                  scalarize([b](const T& x) { return mul(x, b); }, {3, 4}),
                                  rand_tensor(rng, {3, 4})));
        add_grad_check("scale", finite_diff_check(
                                    scalarize([](const T& x) { return scale(x, 1.7); }, {3, 4}),
                                    rand_tensor(rng, {3, 4})));
        add_grad_check("neg", finite_diff_check(scalarize([](const T& x) { return neg(x); }, {5}),
                                                rand_tensor(rng, {5})));
        add_grad_check("abs", finite_diff_check(scalarize([](const T& x) { return abs(x); }, {5}),
                                                rand_tensor(rng, {5})));
        add_grad_check("relu", finite_diff_check(scalarize([](const T& x) { return relu(x); }, {6}),
                                                 rand_tensor(rng, {6})));
        add_grad_check("leaky_relu",
                       finite_diff_check(scalarize([](const T& x) { return leaky_relu(x); }, {6}),
                                         rand_tensor(rng, {6})));
        add_grad_check("clamp",
                       finite_diff_check(
                           scalarize([](const T& x) { return clamp(x, -0.5, 0.5); }, {6}),
                           rand_tensor(rng, {6})));
        add_grad_check("smooth_l1",
                       finite_diff_check(scalarize([](const T& x) { return smooth_l1(x); }, {6}),
                                         rand_tensor(rng, {6}, -2.0, 2.0)));
        add_grad_check("softmax",
                       finite_diff_check(scalarize([](const T& x) { return softmax(x, 0); }, {4, 3}),
                                         rand_tensor(rng, {4, 3})));
        add_grad_check(
            "reduce_sum",
            finite_diff_check(scalarize([](const T& x) { return reduce_sum(x, 1); }, {3, 2}),
                              rand_tensor(rng, {3, 4, 2})));
        add_grad_check(
            "concat+slice",
            finite_diff_check(scalarize(
                                  [b](const T& x) {
                                      return slice(concat<double>({x, b}, 0), 0, 1, 3);
                                  },
                                  {3, 4}),
                              rand_tensor(rng, {3, 4})));
        add_grad_check(
            "reshape",
            finite_diff_check(scalarize([](const T& x) { return reshape(x, {4, 3}); }, {4, 3}),
                              rand_tensor(rng, {3, 4})));
        add_grad_check(
            "pad+crop",
            finite_diff_check(
                scalarize([](const T& x) { return crop_last2(pad_last2(x, 1, 2, 1, 0), 0, 0, 4, 4); },
                          {4, 4}),
                rand_tensor(rng, {3, 4})));
        add_grad_check(
            "repeat0",
            finite_diff_check(scalarize([](const T& x) { return repeat0(x, 3); }, {3, 2, 3}),
                              rand_tensor(rng, {2, 3})));
        add_grad_check(
            "bilinear_resize",
            finite_diff_check(
                scalarize([](const T& x) { return bilinear_resize(x, 5, 7); }, {2, 5, 7}),
                rand_tensor(rng, {2, 3, 4})));
    }
    {
        T w2 = rand_tensor(rng, {2, 3, 3, 3});
        T b2 = rand_tensor(rng, {2});
        T in2 = rand_tensor(rng, {3, 5, 6});
        add_grad_check(
            "conv2d input",
            finite_diff_check(
                scalarize([w2, b2](const T& x) { return conv2d(x, w2, b2, 1, 1); }, {2, 5, 6}),
                in2));
        add_grad_check(
            "conv2d weight",
            finite_diff_check(
                scalarize([in2, b2](const T& x) { return conv2d(in2, x, b2, 2, 1); }, {2, 3, 3}),
                w2));
        T w3 = rand_tensor(rng, {2, 2, 3, 3, 3});
        T b3 = rand_tensor(rng, {2});
        T in3 = rand_tensor(rng, {2, 3, 4, 5});
        add_grad_check(
            "conv3d input",
            finite_diff_check(
                scalarize([w3, b3](const T& x) { return conv3d(x, w3, b3, 1, 1); }, {2, 3, 4, 5}),
                in3));
        add_grad_check(
            "conv3d weight",
            finite_diff_check(
                scalarize([in3, b3](const T& x) { return conv3d(in3, x, b3, 1, 1); }, {2, 3, 4, 5}),
                w3));
    }
    {
        T right = rand_tensor(rng, {2, 4, 7});
        T disp = rand_tensor(rng, {4, 7}, 0.2, 2.7);
        add_grad_check(
            "warp_right features",
            finite_diff_check(
                scalarize([disp](const T& x) { return warp_right(x, disp); }, {2, 4, 7}), right));
        add_grad_check(
            "warp_right disparity",
            finite_diff_check(
                scalarize([right](const T& x) { return warp_right(right, x); }, {2, 4, 7}), disp));
        T l6 = rand_tensor(rng, {2, 4, 7});
        add_grad_check(
            "build_full_volume",
            finite_diff_check(
                scalarize([right](const T& x) { return build_full_volume(x, right, 3); },
                          {4, 3, 4, 7}),
                l6));
        T r6 = rand_tensor(rng, {2, 3, 6});
        T l7 = rand_tensor(rng, {2, 3, 6});
        add_grad_check(
            "compact volume via candidates",
            finite_diff_check(
                scalarize([l7, r6](const T& x) { return build_compact_volume(l7, r6, x); },
                          {4, 3, 3, 6}),
                rand_tensor(rng, {3, 3, 6}, 0.3, 2.5)));
    }
    {
        // Submodules.
        Rng prng(11);
        auto rb = ResidualBlockParams<double>::make(prng, 2, 2, 1);
        add_grad_check(
            "residual_block",
            finite_diff_check(
                scalarize([rb](const T& x) { return residual_block(x, rb); }, {2, 6, 6}),
                rand_tensor(rng, {2, 6, 6})));
        auto dopp = DopParams<double>::make(prng, 3, 3);
        T img = rand_tensor(rng, {3, 16, 16});
        add_grad_check(
            "dop offsets",
            finite_diff_check(
                scalarize([img, dopp](const T& x) { return predict_offsets(x, img, dopp, 4, 4); },
                          {3, 4, 4}),
                rand_tensor(rng, {2, 2}, 0.0, 2.0)));
        auto s1 = Stage1Params<double>::make(prng, 4, 2);
        {
            T wi = rand_tensor(rng, {2, 4, 4}, 0.2, 1.0);
            T wf = rand_tensor(rng, {2, 4, 4}, 0.2, 1.0);
            add_grad_check(
                "stage1 heads",
                finite_diff_check(
                    [s1, wi, wf](const T& x) {
                        auto [ci, cf] = regularize_full(x, s1);
                        return add(sum(mul(ci, wi)), sum(mul(cf, wf)));
                    },
                    rand_tensor(rng, {4, 2, 4, 4})));
        }
        auto dic = DicParams<double>::make(prng, 4, 3, 2);
        {
            T wi = rand_tensor(rng, {3, 5, 5}, 0.2, 1.0);
            T wf = rand_tensor(rng, {3, 5, 5}, 0.2, 1.0);
            add_grad_check(
                "dic stack",
                finite_diff_check(
                    [dic, wi, wf](const T& x) {
                        auto [ci, cf] = dic_forward(x, dic);
                        return add(sum(mul(ci, wi)), sum(mul(cf, wf)));
                    },
                    rand_tensor(rng, {4, 3, 5, 5})));
        }
        T cands = rand_tensor(rng, {3, 4, 4}, 0.0, 3.0);
        add_grad_check(
            "soft_argmin_full",
            finite_diff_check(
                scalarize([](const T& x) { return soft_argmin_full(x); }, {3, 3}),
                rand_tensor(rng, {4, 3, 3})));
        add_grad_check(
            "soft_argmin_candidates",
            finite_diff_check(
                scalarize([cands](const T& x) { return soft_argmin_candidates(x, cands); }, {4, 4}),
                rand_tensor(rng, {3, 4, 4})));
        T gt = rand_tensor(rng, {4, 4}, 0.0, 3.0);
        T mask = T::full({4, 4}, 1.0);
        add_grad_check(
            "total_loss",
            finite_diff_check(
                [gt, mask](const T& x) {
                    std::array<T, 4> outs = {x, add(x, 0.1), add(x, -0.1), x};
                    return total_loss(outs, gt, mask);
                },
                rand_tensor(rng, {4, 4}, 0.0, 3.0)));
    }
    {
        // Hand-computed check with an injection point: a corrupted analytic
        // gradient must trip the comparison.
        T x = rand_tensor(rng, {5});
        T w = rand_tensor(rng, {5}, 0.3, 1.0);
        x.set_requires_grad(true);
        {
            Tape<double> tape;
            T y = sum(mul(mul(x, x), w));
            tape.backward(y);
        }
        double max_rel = 0.0;
        for (size_t i = 0; i < 5; ++i) {
            const double analytic = x.grad()[i] * (1.0 + corruption);
            const double eps = 1e-4;
            const double orig = x.data()[i];
            double fp, fm;
            {
                NoGradScope<double> ng;
                x.data()[i] = orig + eps;
                fp = sum(mul(mul(x, x), w)).item();
                x.data()[i] = orig - eps;
                fm = sum(mul(mul(x, x), w)).item();
            }
            x.data()[i] = orig;
            const double fd = (fp - fm) / (2.0 * eps);
            max_rel = std::max(max_rel, std::abs(analytic - fd) / (std::abs(analytic) + 1e-8));
        }
        add_grad_check("backward rule consistency", max_rel);
    }
}

void oracle_checks(std::vector<Check>& out) {
    Rng rng(99);
    double worst2 = 0.0;
    for (int i = 0; i < 5; ++i) {
        const int cin = rand_int(rng, 1, 3), cout = rand_int(rng, 1, 3);
        const int h = rand_int(rng, 4, 9), w = rand_int(rng, 4, 9);
        const int k = 2 * rand_int(rng, 0, 1) + 1;
        const int stride = rand_int(rng, 1, 2), pad = rand_int(rng, 0, 1);
        if (h + 2 * pad < k || w + 2 * pad < k) continue;
        T in = rand_tensor(rng, {cin, h, w});
        T wt = rand_tensor(rng, {cout, cin, k, k});
        T b = rand_tensor(rng, {cout});
        worst2 = std::max(worst2,
                          max_abs_diff(conv2d(in, wt, b, stride, pad),
                                       reference::conv2d(in, wt, b, stride, pad)));
    }
    out.push_back(make_check("oracle: conv2d vs nested loops", "oracle", worst2 < 1e-6, worst2));

    double worst3 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const int cin = rand_int(rng, 1, 2), cout = rand_int(rng, 1, 2);
        const int d = rand_int(rng, 3, 5), h = rand_int(rng, 3, 6), w = rand_int(rng, 3, 6);
        T in = rand_tensor(rng, {cin, d, h, w});
        T wt = rand_tensor(rng, {cout, cin, 3, 3, 3});
        T b = rand_tensor(rng, {cout});
        worst3 = std::max(
            worst3, max_abs_diff(conv3d(in, wt, b, 1, 1), reference::conv3d(in, wt, b, 1, 1)));
    }
    out.push_back(make_check("oracle: conv3d vs nested loops", "oracle", worst3 < 1e-6, worst3));

    double worst_dic = 0.0;
    for (int i = 0; i < 3; ++i) {
        Rng prng(500 + static_cast<uint32_t>(i));
        const int f2 = 2 * rand_int(rng, 1, 2);
        const int n = rand_int(rng, 2, 5);
        auto p = DicParams<double>::make(prng, f2, n, 2);
        T vol = rand_tensor(rng, {f2, n, 6, 7});
        auto [fi, ff] = dic_forward(vol, p);
        auto [oi, of] = dic_oracle(vol, p);
        worst_dic = std::max({worst_dic, max_abs_diff(fi, oi), max_abs_diff(ff, of)});
    }
    out.push_back(
        make_check("oracle: dic_forward vs dic_oracle", "oracle", worst_dic < 1e-6, worst_dic));
}

void identity_checks(std::vector<Check>& out) {
    Rng rng(7);
    {
        T costs = T::zeros({4, 2, 2});
        T d = soft_argmin_full(costs);
        double err = 0.0;
        for (auto v : d.data()) err = std::max(err, std::abs(v - 1.5));
        out.push_back(make_check("identity: uniform soft-argmin = (D-1)/2", "identity",
                                 err == 0.0, err));
    }
    {
        T costs = rand_tensor(rng, {5, 3, 3});
        T shifted = add(costs, 7.0);
        const double err = max_abs_diff(soft_argmin_full(costs), soft_argmin_full(shifted));
        out.push_back(make_check("identity: cost-shift invariance", "identity", err < 1e-9, err));
    }
    {
        T x = rand_tensor(rng, {6, 4});
        T p = softmax(x, 0);
        double err = 0.0;
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int i = 0; i < 6; ++i) s += p.at({i, j});
            err = std::max(err, std::abs(s - 1.0));
        }
        const double shift_err = max_abs_diff(p, softmax(add(x, 3.25), 0));
        out.push_back(make_check("identity: softmax rows sum to 1", "identity", err < 1e-9, err));
        out.push_back(
            make_check("identity: softmax shift invariance", "identity", shift_err < 1e-9,
                       shift_err));
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            T costs = rand_tensor(rng, {4, 3, 3}, -3.0, 3.0);
            T cands = rand_tensor(rng, {4, 3, 3}, 0.0, 10.0);
            T d = soft_argmin_candidates(costs, cands);
            for (int y = 0; y < 3; ++y)
                for (int x = 0; x < 3; ++x) {
                    double lo = 1e30, hi = -1e30;
                    for (int n = 0; n < 4; ++n) {
                        lo = std::min(lo, cands.at({n, y, x}));
                        hi = std::max(hi, cands.at({n, y, x}));
                    }
                    const double v = d.at({y, x});
                    worst = std::max({worst, lo - v, v - hi});
                }
        }
        out.push_back(
            make_check("identity: candidate-hull containment", "identity", worst <= 1e-12, worst));
    }
}

void metric_checks(std::vector<Check>& out) {
    Rng rng(31);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const int h = rand_int(rng, 3, 8), w = rand_int(rng, 3, 8);
        T pred = rand_tensor(rng, {h, w}, 0.0, 30.0);
        T gt = rand_tensor(rng, {h, w}, 0.0, 30.0);
        T mask = T::zeros({h, w});
        bool any = false;
        for (auto& v : mask.data()) {
            v = rand_unit(rng) < 0.7 ? 1.0 : 0.0;
            any = any || v > 0.5;
        }
        if (!any) mask.data()[0] = 1.0;
        std::vector<double> err, gtv;
        std::vector<bool> valid;
        for (int64_t j = 0; j < pred.numel(); ++j) {
            err.push_back(pred.data()[j] - gt.data()[j]);
            gtv.push_back(gt.data()[j]);
            valid.push_back(mask.data()[j] > 0.5);
        }
        worst = std::max({worst, std::abs(metric_epe(pred, gt, mask) - reference::epe(err, valid)),
                          std::abs(metric_px(pred, gt, mask, 2.0) - reference::px(err, valid, 2.0)),
                          std::abs(metric_px(pred, gt, mask, 3.0) - reference::px(err, valid, 3.0)),
                          std::abs(metric_d1(pred, gt, mask) - reference::d1(err, gtv, valid)),
                          std::abs(metric_a95(pred, gt, mask) - reference::a95(err, valid))});
    }
    out.push_back(make_check("metric: oracles agree", "metric", worst < 1e-9, worst));

    // D1 boundary behaviour at gt 60 vs gt 100 with a 4 px error.
    T pred = T::from({1, 2}, {64.0, 104.0});
    T gt = T::from({1, 2}, {60.0, 100.0});
    T m1 = T::from({1, 2}, {1.0, 0.0});
    T m2 = T::from({1, 2}, {0.0, 1.0});
    const bool b1 = metric_d1(pred, gt, m1) == 100.0;
    const bool b2 = metric_d1(pred, gt, m2) == 0.0;
    out.push_back(make_check("metric: d1 boundary classification", "metric", b1 && b2,
                             b1 && b2 ? 0.0 : 1.0));
}

} // namespace

Report run(const Options& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    gradient_checks(rep.checks, opts.gradient_corruption);
    oracle_checks(rep.checks);
    identity_checks(rep.checks);
    metric_checks(rep.checks);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void print(const Report& rep, std::ostream& os) {
    for (const auto& c : rep.checks)
        os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
    os << (rep.all_pass() ? "selftest passed" : "selftest FAILED") << " in " << std::fixed
       << std::setprecision(2) << rep.seconds << "s (" << rep.checks.size() << " checks)\n";
}

} // namespace adcp::selftest
