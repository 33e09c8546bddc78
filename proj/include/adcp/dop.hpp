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
#include <vector>

#include "adcp/backbone.hpp"

namespace adcp {

/// Constant-offset baseline: k^n = n - ceil(N/2) for n = 1..N, so N=5 gives
/// {-2,-1,0,1,2}.
inline std::vector<int> constant_offsets(int n) {
    check(n >= 1, "constant_offsets: N must be >= 1, got ", n);
    std::vector<int> k(static_cast<size_t>(n));
    const int mid = (n + 1) / 2;  // ceil(N/2)
    for (int i = 1; i <= n; ++i) k[static_cast<size_t>(i - 1)] = i - mid;
    return k;
}

/// Constant offsets materialized as a non-learned [N,H,W] field.
template <typename S>
Tensor<S> constant_offset_field(int n, int h, int w) {
    const std::vector<int> ks = constant_offsets(n);
    Tensor<S> t = Tensor<S>::zeros({n, h, w});
    S* v = t.data().data();
    for (int i = 0; i < n; ++i) {
        const S k = static_cast<S>(ks[static_cast<size_t>(i)]);
        for (int64_t j = 0; j < int64_t(h) * w; ++j) v[int64_t(i) * h * w + j] = k;
    }
    return t;
}

/// Offset predictor: entry conv on the 4-channel (coarse disparity + RGB)
/// map, four stride-1 residual blocks, and a linear head emitting N-1
/// channels. Channel 1 is pinned to zero structurally, never learned.
template <typename S>
struct DopParams {
    int n = 0;
    Conv2dLayer<S> entry;                           // 4 -> C_DOP
    std::array<ResidualBlockParams<S>, 4> blocks;   // C_DOP, stride 1
    Conv2dLayer<S> head;                            // C_DOP -> N-1 (absent for N=1)

    static DopParams make(Rng& rng, int c_dop, int n) {
        check(n >= 1, "dop: N must be >= 1");
        check(c_dop >= 1, "dop: C_DOP must be >= 1");
        DopParams p;
        p.n = n;
        p.entry = Conv2dLayer<S>::make(rng, c_dop, 4, 3, 1, 1);
        // The disparity channel carries values up to D_max/4 while the RGB
        // channels sit in [-1,1]; shrink its initial weights so the image
        // signal is not drowned out before the entry conv has adapted.
        {
            auto w = p.entry.w.data();  // [c_dop, 4, 3, 3]
            for (int u = 0; u < c_dop; ++u)
                for (int i = 0; i < 9; ++i) w[static_cast<size_t>(u) * 4 * 9 + i] *= S(1.0 / 16.0);
        }
        for (auto& b : p.blocks) b = ResidualBlockParams<S>::make(rng, c_dop, c_dop, 1);
        if (n > 1) {
            // Zero-started head: candidates begin at the coarse disparity and
            // offsets grow only where the loss pulls them. A randomly
            // initialized unbounded head lets offsets run away past the
            // candidate clamp, where the gradient dies.
            p.head = Conv2dLayer<S>::make(rng, n - 1, c_dop, 3, 1, 1);
            for (S& v : p.head.w.data()) v = S(0);
        }
        return p;
    }

    void for_each_param(const std::string& prefix, const ParamVisitor<S>& fn) {
        entry.for_each_param(prefix + ".entry", fn);
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i].for_each_param(prefix + ".block" + std::to_string(i + 1), fn);
        if (n > 1) head.for_each_param(prefix + ".head", fn);
    }
};

/// Predicts the [N, H_s, W_s] offset field from the coarse disparity map and
/// the (normalized) left image. Both inputs are resized to the target
/// resolution; disparity values are rescaled by the resolution ratio.
template <typename S>
Tensor<S> predict_offsets(const Tensor<S>& coarse_disp, const Tensor<S>& left_img,
                          const DopParams<S>& p, int out_h, int out_w) {
    check(coarse_disp.ndim() == 2, "predict_offsets: coarse disparity must be [H,W], got ",
          to_string(coarse_disp.shape()));
    check(left_img.ndim() == 3 && left_img.dim(0) == 3,
          "predict_offsets: left image must be [3,H,W], got ", to_string(left_img.shape()));
    const S ratio = static_cast<S>(static_cast<double>(out_w) / coarse_disp.dim(1));
    Tensor<S> disp_ch = reshape(coarse_disp, {1, coarse_disp.dim(0), coarse_disp.dim(1)});
    disp_ch = scale(bilinear_resize(disp_ch, out_h, out_w), ratio);
    Tensor<S> img_ch = bilinear_resize(left_img, out_h, out_w);
    Tensor<S> x = concat<S>({disp_ch, img_ch}, 0);  // [4, H_s, W_s]

    Tensor<S> a = leaky_relu(p.entry(x));
    for (const auto& b : p.blocks) a = residual_block(a, b);

    Tensor<S> zero_ch = Tensor<S>::zeros({1, out_h, out_w});
    if (p.n == 1) return zero_ch;
    return concat<S>({zero_ch, p.head(a)}, 0);  // [N, H_s, W_s]
}

/// Candidate field of Eq.-style sums: cands[n] = clamp(coarse + k^n, 0,
/// d_range - 1). Candidates stay fractional; no rounding.
template <typename S>
Tensor<S> make_candidates(const Tensor<S>& coarse_up, const Tensor<S>& offsets, S d_range) {
    check(coarse_up.ndim() == 2, "make_candidates: coarse map must be [H,W]");
    check(offsets.ndim() == 3 && offsets.dim(1) == coarse_up.dim(0) &&
              offsets.dim(2) == coarse_up.dim(1),
          "make_candidates: offsets ", to_string(offsets.shape()), " do not match coarse map ",
          to_string(coarse_up.shape()));
    Tensor<S> rep = repeat0(coarse_up, offsets.dim(0));
    return clamp(add(rep, offsets), S(0), d_range - S(1));
}

} // namespace adcp
