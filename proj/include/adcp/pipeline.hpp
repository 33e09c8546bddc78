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

#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

#include "adcp/aggregation.hpp"
#include "adcp/backbone.hpp"
#include "adcp/costvol.hpp"
#include "adcp/data_io.hpp"
#include "adcp/dop.hpp"
#include "adcp/optim.hpp"
#include "adcp/regression.hpp"

namespace adcp {

enum class OffsetMode { dop, constant };
enum class Agg2Mode { dic, conv3d };

/// Model hyper-parameters. Presets: M = (C,C_3d,C_DOP) (4,8,16), S halves
/// them, L doubles them. Stage 2 runs at 1/4 resolution on the f4 features.
struct ModelConfig {
    int C = 4;
    int C3d = 8;
    int Cdop = 16;
    int N = 7;
    int Dmax = 192;
    OffsetMode offsets = OffsetMode::dop;
    Agg2Mode agg2 = Agg2Mode::dic;

    static constexpr int stage2_scale = 4;

    static ModelConfig preset(char which, int n = 7, int dmax = 192) {
        ModelConfig c;
        switch (which) {
            case 'S': c.C = 2; c.C3d = 4; c.Cdop = 8; break;
            case 'M': c.C = 4; c.C3d = 8; c.Cdop = 16; break;
            case 'L': c.C = 8; c.C3d = 16; c.Cdop = 32; break;
            default: fail("unknown preset '", which, "', expected S, M or L");
        }
        c.N = n;
        c.Dmax = dmax;
        c.validate();
        return c;
    }

    void validate() const {
        check(C >= 1 && C3d >= 1 && Cdop >= 1, "model: channel sizes must be positive");
        check(N >= 1, "model: N must be >= 1");
        check(Dmax >= 16 && Dmax % 16 == 0, "model: D_max must be a positive multiple of 16, got ",
              Dmax);
    }

    int coarse_levels() const { return Dmax / 16; }
    int stage2_range() const { return Dmax / stage2_scale; }
};

template <typename S>
struct Model {
    ModelConfig cfg;
    BackboneParams<S> backbone;
    UnaryParams<S> unary;
    Stage1Params<S> stage1;
    DopParams<S> dop;             // active iff cfg.offsets == OffsetMode::dop
    DicParams<S> dic;             // active iff cfg.agg2 == Agg2Mode::dic
    Stage2Conv3dParams<S> agg2_3d;  // active iff cfg.agg2 == Agg2Mode::conv3d

    static Model init(const ModelConfig& cfg, uint32_t seed) {
        cfg.validate();
        Model m;
        m.cfg = cfg;
        Rng rng(seed);
        m.backbone = BackboneParams<S>::make(rng, cfg.C);
        m.unary = UnaryParams<S>::make(rng, 8 * cfg.C);
        m.stage1 = Stage1Params<S>::make(rng, 16 * cfg.C, cfg.C3d);
        if (cfg.offsets == OffsetMode::dop) m.dop = DopParams<S>::make(rng, cfg.Cdop, cfg.N);
        if (cfg.agg2 == Agg2Mode::dic)
            m.dic = DicParams<S>::make(rng, 4 * cfg.C, cfg.N, cfg.C3d);
        else
            m.agg2_3d = Stage2Conv3dParams<S>::make(rng, 4 * cfg.C, cfg.C3d);
        return m;
    }

    void for_each_param(const ParamVisitor<S>& fn) {
        backbone.for_each_param("backbone", fn);
        unary.for_each_param("unary", fn);
        stage1.for_each_param("stage1", fn);
        if (cfg.offsets == OffsetMode::dop) dop.for_each_param("dop", fn);
        if (cfg.agg2 == Agg2Mode::dic)
            dic.for_each_param("dic", fn);
        else
            agg2_3d.for_each_param("agg2_3d", fn);
    }

    NamedParams<S> named_params() {
        NamedParams<S> out;
        for_each_param([&](const std::string& name, Tensor<S>& t) { out.emplace_back(name, t); });
        return out;
    }

    int64_t param_count() {
        int64_t n = 0;
        for_each_param([&](const std::string&, Tensor<S>& t) { n += t.numel(); });
        return n;
    }
};

template <typename S>
struct ForwardOut {
    Tensor<S> d11, d12;  // coarse heads, [H/16, W/16], values at 1/16 scale
    Tensor<S> d21, d22;  // fine heads, [H/4, W/4], values at 1/4 scale
    Tensor<S> offsets;   // [N, H/4, W/4]
    Tensor<S> cands;     // [N, H/4, W/4]
    Tensor<S> full_res;  // [H, W], full-scale disparity
};

/// Full two-stage forward pass. Inputs must be normalized [3,H,W] images with
/// H and W multiples of 16.
template <typename S>
ForwardOut<S> forward(const Model<S>& m, const Tensor<S>& left, const Tensor<S>& right) {
    check(left.ndim() == 3 && left.dim(0) == 3, "forward: left image must be [3,H,W]");
    check(left.shape() == right.shape(), "forward: left/right shape mismatch: ",
          to_string(left.shape()), " vs ", to_string(right.shape()));
    const int h = left.dim(1), w = left.dim(2);
    check(h % 16 == 0 && w % 16 == 0, "forward: input must be padded to multiples of 16, got ", h,
          "x", w);

    ForwardOut<S> o;
    FeaturePyramid<S> fl, fr;
    Tensor<S> ul, ur;
    {
        flops::SectionGuard section(flops::Section::features);
        fl = extract_features(left, m.backbone);
        fr = extract_features(right, m.backbone);
        ul = stage1_unary(fl.f16, m.unary);
        ur = stage1_unary(fr.f16, m.unary);
    }
    {
        flops::SectionGuard section(flops::Section::stage1);
        Tensor<S> vol = build_full_volume(ul, ur, m.cfg.coarse_levels());
        auto [cost_inter, cost_final] = regularize_full(vol, m.stage1);
        o.d11 = soft_argmin_full(cost_inter);
        o.d12 = soft_argmin_full(cost_final);
    }
    {
        flops::SectionGuard section(flops::Section::stage2);
        const int h4 = h / 4, w4 = w / 4;
        Tensor<S> coarse_up = scale(bilinear_resize(o.d12, h4, w4), S(4));
        o.offsets = m.cfg.offsets == OffsetMode::dop
                        ? predict_offsets(o.d12, left, m.dop, h4, w4)
                        : constant_offset_field<S>(m.cfg.N, h4, w4);
        o.cands = make_candidates(coarse_up, o.offsets, static_cast<S>(m.cfg.stage2_range()));
        Tensor<S> vol2 = build_compact_volume(fl.f4, fr.f4, o.cands);
        auto [cost_inter, cost_final] = m.cfg.agg2 == Agg2Mode::dic
                                            ? dic_forward(vol2, m.dic)
                                            : regularize_compact_3d(vol2, m.agg2_3d);
        o.d21 = soft_argmin_candidates(cost_inter, o.cands);
        o.d22 = soft_argmin_candidates(cost_final, o.cands);
        o.full_res = scale(bilinear_resize(o.d22, h, w), S(4));
    }
    return o;
}

/// Upsamples the four heads to ground-truth resolution (values rescaled) and
/// applies the weighted masked smooth-L1 loss.
template <typename S>
Tensor<S> training_loss(const ForwardOut<S>& o, const Tensor<S>& gt, const Tensor<S>& mask,
                        const LossWeights& w = {}) {
    const int h = gt.dim(0), w_ = gt.dim(1);
    std::array<Tensor<S>, 4> ups = {
        scale(bilinear_resize(o.d11, h, w_), S(16)),
        scale(bilinear_resize(o.d12, h, w_), S(16)),
        scale(bilinear_resize(o.d21, h, w_), S(4)),
        scale(bilinear_resize(o.d22, h, w_), S(4)),
    };
    return total_loss(ups, gt, mask, w);
}

template <typename S>
Tensor<S> cast_tensor(const Tensor<float>& t) {
    Tensor<S> out = Tensor<S>::zeros(t.shape());
    for (int64_t i = 0; i < t.numel(); ++i) out.data()[i] = static_cast<S>(t.data()[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
    Metrics d11, d12, d21, d22;
    double ms_per_image = 0.0;
    int count = 0;

    std::vector<std::pair<std::string, double>> to_kv() const {
        std::vector<std::pair<std::string, double>> kv;
        auto put = [&](const std::string& head, const Metrics& m) {
            kv.emplace_back(head + ".epe", m.epe);
            kv.emplace_back(head + ".d1", m.d1);
            kv.emplace_back(head + ".2px", m.px2);
            kv.emplace_back(head + ".3px", m.px3);
            kv.emplace_back(head + ".a95", m.a95);
        };
        put("d11", d11);
        put("d12", d12);
        put("d21", d21);
        put("d22", d22);
        kv.emplace_back("runtime.ms_per_image", ms_per_image);
        kv.emplace_back("images", static_cast<double>(count));
        return kv;
    }
};

namespace detail {
struct SampleMetrics {
    Metrics d11, d12, d21, d22;
    double ms = 0.0;
};

template <typename S>
SampleMetrics eval_one(const Model<S>& m, const StereoSample& raw) {
    Tensor<S> left = cast_tensor<S>(raw.left);
    Tensor<S> right = cast_tensor<S>(raw.right);
    for (auto& v : left.data()) v = (v - S(0.5)) / S(0.5);
    for (auto& v : right.data()) v = (v - S(0.5)) / S(0.5);
    const int h = raw.left.dim(1), w = raw.left.dim(2);
    const int ph = (16 - h % 16) % 16, pw = (16 - w % 16) % 16;
    if (ph || pw) {
        left = pad_last2(left, 0, ph, 0, pw);
        right = pad_last2(right, 0, ph, 0, pw);
    }
    const auto t0 = std::chrono::steady_clock::now();
    ForwardOut<S> o = forward(m, left, right);
    const auto t1 = std::chrono::steady_clock::now();

    const int fh = h + ph, fw = w + pw;
    const Tensor<S> gt = cast_tensor<S>(raw.gt);
    const Tensor<S> mask = cast_tensor<S>(raw.valid);
    auto head_metrics = [&](const Tensor<S>& head, S value_scale) {
        Tensor<S> up = scale(bilinear_resize(head, fh, fw), value_scale);
        if (ph || pw) up = crop_last2(up, 0, 0, h, w);
        return compute_metrics(up, gt, mask);
    };
    SampleMetrics sm;
    sm.d11 = head_metrics(o.d11, S(16));
    sm.d12 = head_metrics(o.d12, S(16));
    sm.d21 = head_metrics(o.d21, S(4));
    sm.d22 = head_metrics(o.d22, S(4));
    sm.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return sm;
}
} // namespace detail

/// Mean per-image metrics for every head, plus forward wall-clock per image.
/// Sample evaluations are independent; `threads` > 1 splits them while
/// keeping the (ordered) reduction deterministic.
template <typename S>
EvalReport evaluate(const Model<S>& m, const std::vector<StereoSample>& set, int threads = 1) {
    check(!set.empty(), "evaluate: empty dataset");
    const int n = static_cast<int>(set.size());
    std::vector<detail::SampleMetrics> all(static_cast<size_t>(n));
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = detail::eval_one(m, set[static_cast<size_t>(i)]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    all[static_cast<size_t>(i)] = detail::eval_one(m, set[static_cast<size_t>(i)]);
            });
        for (auto& th : pool) th.join();
    }
    EvalReport rep;
    rep.count = n;
    auto acc = [n](Metrics& dst, const Metrics& src) {
        dst.epe += src.epe / n;
        dst.d1 += src.d1 / n;
        dst.px2 += src.px2 / n;
        dst.px3 += src.px3 / n;
        dst.a95 += src.a95 / n;
    };
    for (const auto& sm : all) {
        acc(rep.d11, sm.d11);
        acc(rep.d12, sm.d12);
        acc(rep.d21, sm.d21);
        acc(rep.d22, sm.d22);
        rep.ms_per_image += sm.ms / n;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainOptions {
    int iters = 1000;
    int batch = 1;
    double lr = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int lr_half_period = 0;  // halve the rate every this many iterations; 0 keeps it constant
    uint32_t seed = 1;
    int crop_h = 0, crop_w = 0;  // 0 = full image
    int val_period = 0;          // evaluate on the validation set every this many iterations
    int log_period = 25;
    int eval_threads = 1;
    std::ostream* log = nullptr;
};

struct TrainResult {
    double final_loss = 0.0;
    int64_t next_iter = 0;
    std::vector<double> loss_history;
};

template <typename S>
double lr_at(const TrainOptions& opt, int64_t iter) {
    if (opt.lr_half_period <= 0) return opt.lr;
    return opt.lr * std::pow(0.5, static_cast<double>(iter / opt.lr_half_period));
}

/// Adam training against the four-output loss. Deterministic given the seed;
/// aborts with an error if the loss goes non-finite.
template <typename S>
TrainResult train(Model<S>& m, const std::vector<StereoSample>& train_set,
                  const std::vector<StereoSample>& val_set, const TrainOptions& opt,
                  AdamState<S>& state, Rng& rng, int64_t start_iter = 0) {
    check(!train_set.empty(), "train: empty training set");
    NamedParams<S> params = m.named_params();
    if (state.slots.empty()) state.init_like(params);

    TrainResult res;
    res.loss_history.reserve(static_cast<size_t>(opt.iters));
    for (int64_t it = start_iter; it < start_iter + opt.iters; ++it) {
        const double lr = lr_at<S>(opt, it);
        zero_grads(params);
        double loss_value = 0.0;
        {
            Tape<S> tape;
            Tensor<S> acc;
            for (int b = 0; b < opt.batch; ++b) {
                const int idx = rand_int(rng, 0, static_cast<int>(train_set.size()) - 1);
                const StereoSample& raw = train_set[static_cast<size_t>(idx)];
                const int ch = opt.crop_h > 0 ? opt.crop_h : raw.left.dim(1);
                const int cw = opt.crop_w > 0 ? opt.crop_w : raw.left.dim(2);
                StereoSample sp = preprocess(raw, ch, cw, rng);
                Tensor<S> left = cast_tensor<S>(sp.left);
                Tensor<S> right = cast_tensor<S>(sp.right);
                ForwardOut<S> o = forward(m, left, right);
                Tensor<S> li = training_loss(o, cast_tensor<S>(sp.gt), cast_tensor<S>(sp.valid));
                acc = b == 0 ? li : add(acc, li);
            }
            Tensor<S> loss = scale(acc, S(1.0 / opt.batch));
            loss_value = static_cast<double>(loss.item());
            check(std::isfinite(loss_value), "train: loss diverged (non-finite) at iteration ", it);
            tape.backward(loss);
        }
        adam_step(params, state, lr, opt.beta1, opt.beta2, opt.eps);
        res.loss_history.push_back(loss_value);
        res.final_loss = loss_value;
        res.next_iter = it + 1;

        if (opt.log && opt.log_period > 0 && (it % opt.log_period == 0 || it == start_iter + opt.iters - 1)) {
            (*opt.log) << "iter=" << it << " loss=" << loss_value << " lr=" << lr << "\n";
        }
        if (opt.val_period > 0 && !val_set.empty() && (it + 1) % opt.val_period == 0) {
            const EvalReport rep = evaluate(m, val_set, opt.eval_threads);
            if (opt.log)
                (*opt.log) << "iter=" << it << " val.d22.epe=" << rep.d22.epe
                           << " val.d22.d1=" << rep.d22.d1 << "\n";
        }
    }
    return res;
}

} // namespace adcp
