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

#include "adcp/synthetic.hpp"

#include <cmath>

namespace adcp {

namespace {

constexpr double kTau = 6.283185307179586;

struct TexParams {
    float base[3];
    float amp[2];
    float fx[2], fy[2];
    float phase[2][3];
};

struct Layer {
    int x0, y0, x1, y1;  // half-open rect in the left view
    double d_base = 0.0;
    double d_slope = 0.0;  // disparity change per column
    int rank = 0;          // tie-break: later layers are nearer
    TexParams tex{};
};

TexParams draw_texture(Rng& rng, double scale) {
    TexParams t{};
    for (float& b : t.base) b = static_cast<float>(rand_uniform(rng, 0.3, 0.7));
    for (int k = 0; k < 2; ++k) {
        t.amp[k] = static_cast<float>(rand_uniform(rng, 0.08, 0.22));
        t.fx[k] = static_cast<float>(rand_uniform(rng, 0.3, 1.6) * scale);
        t.fy[k] = static_cast<float>(rand_uniform(rng, 0.3, 1.6) * scale);
        for (int c = 0; c < 3; ++c)
            t.phase[k][c] = static_cast<float>(rand_uniform(rng, 0.0, kTau));
    }
    return t;
}

// Procedural texture defined on the whole plane; evaluated only at integer
// positions so splatted copies stay bit-identical.
float tex_at(const TexParams& t, int c, int y, int x) {
    double v = t.base[c];
    for (int k = 0; k < 2; ++k)
        v += t.amp[k] * std::sin(kTau * (t.fx[k] * x + t.fy[k] * y) + t.phase[k][c]);
    return static_cast<float>(std::clamp(v, 0.02, 0.98));
}

int disparity_at(const Layer& l, int x) {
    const double d = l.d_base + l.d_slope * (x - l.x0);
    return std::max(0, static_cast<int>(std::lround(d)));
}

bool covers(const Layer& l, int y, int x) {
    return x >= l.x0 && x < l.x1 && y >= l.y0 && y < l.y1;
}

} // namespace

StereoSample gen_synthetic(const SceneSpec& spec) {
    const int w = spec.width, h = spec.height;
    check(w >= 32 && h >= 32, "gen_synthetic: image must be at least 32x32, got ", w, "x", h);
    check(spec.layer_count >= 1, "gen_synthetic: need at least the background layer");
    check(spec.disp_min >= 0 && spec.disp_max >= spec.disp_min,
          "gen_synthetic: bad disparity range [", spec.disp_min, ",", spec.disp_max, "]");
    check(spec.disp_max <= w / 2, "gen_synthetic: disparity range ", spec.disp_max,
          " exceeds half the image width ", w / 2);
    check(spec.thin_count == 0 ||
              (spec.thin_min_width >= 1 && spec.thin_max_width >= spec.thin_min_width &&
               spec.thin_max_width < 8),
          "gen_synthetic: thin bars must be 1..7 px wide");

    Rng rng(spec.seed);
    const double span = static_cast<double>(spec.disp_max - spec.disp_min);

    std::vector<Layer> layers;
    int rank = 0;

    // Background: full frame, far.
    {
        Layer bg;
        bg.x0 = 0;
        bg.y0 = 0;
        bg.x1 = w;
        bg.y1 = h;
        bg.d_base = rand_uniform(rng, spec.disp_min, spec.disp_min + span * 0.25);
        bg.d_slope = spec.slanted ? rand_uniform(rng, -0.03, 0.03) : 0.0;
        bg.rank = rank++;
        bg.tex = draw_texture(rng, spec.texture_scale);
        layers.push_back(bg);
    }

    // Mid-ground rectangles at graded depths.
    for (int i = 1; i < spec.layer_count; ++i) {
        Layer l;
        const int lw = rand_int(rng, w / 5, w / 2);
        const int lh = rand_int(rng, h / 4, (3 * h) / 4);
        l.x0 = rand_int(rng, 0, w - lw);
        l.y0 = rand_int(rng, 0, h - lh);
        l.x1 = l.x0 + lw;
        l.y1 = l.y0 + lh;
        const double lo = spec.disp_min + span * (0.25 + 0.5 * (i - 1) /
                                                             std::max(1, spec.layer_count - 1));
        const double hi = spec.disp_min + span * (0.25 + 0.5 * i /
                                                             std::max(1, spec.layer_count - 1));
        l.d_base = rand_uniform(rng, lo, hi);
        l.d_slope = spec.slanted ? rand_uniform(rng, -0.08, 0.08) : 0.0;
        l.rank = rank++;
        l.tex = draw_texture(rng, spec.texture_scale);
        layers.push_back(l);
    }

    // Thin vertical bars, nearest; narrow enough that 1/16 downsampling
    // erases them from the coarse stage.
    for (int i = 0; i < spec.thin_count; ++i) {
        Layer l;
        const int bw = rand_int(rng, spec.thin_min_width, spec.thin_max_width);
        l.x0 = rand_int(rng, spec.disp_max, std::max(spec.disp_max, w - bw - 1));
        l.x1 = l.x0 + bw;
        l.y0 = rand_int(rng, 0, h / 4);
        l.y1 = h - rand_int(rng, 0, h / 4);
        l.d_base = rand_uniform(rng, spec.disp_min + span * 0.8, static_cast<double>(spec.disp_max));
        l.d_slope = 0.0;
        l.rank = rank++;
        l.tex = draw_texture(rng, spec.texture_scale);
        layers.push_back(l);
    }

    StereoSample s;
    s.left = Tensor<float>::zeros({3, h, w});
    s.right = Tensor<float>::zeros({3, h, w});
    s.gt = Tensor<float>::zeros({h, w});
    s.valid = Tensor<float>::zeros({h, w});

    const int64_t plane = static_cast<int64_t>(h) * w;
    float* lv = s.left.data().data();
    float* rv = s.right.data().data();
    float* gv = s.gt.data().data();
    float* mv = s.valid.data().data();

    std::vector<int> top(static_cast<size_t>(plane), -1);  // visible layer per left pixel
    std::vector<int> gti(static_cast<size_t>(plane), 0);

    // Left view: the covering layer with the largest disparity wins (nearer),
    // later rank on ties.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int best = -1, best_d = -1, best_rank = -1;
            for (size_t li = 0; li < layers.size(); ++li) {
                if (!covers(layers[li], y, x)) continue;
                const int d = disparity_at(layers[li], x);
                if (d > best_d || (d == best_d && layers[li].rank > best_rank)) {
                    best = static_cast<int>(li);
                    best_d = d;
                    best_rank = layers[li].rank;
                }
            }
            top[static_cast<size_t>(y) * w + x] = best;
            gti[static_cast<size_t>(y) * w + x] = best_d;
            gv[static_cast<size_t>(y) * w + x] = static_cast<float>(best_d);
            for (int c = 0; c < 3; ++c)
                lv[c * plane + static_cast<int64_t>(y) * w + x] =
                    tex_at(layers[static_cast<size_t>(best)].tex, c, y, x);
        }
    }

    // Right view by splatting visible left pixels; nearer splats win. The
    // winning source column is remembered so occluded left pixels can be
    // masked out exactly.
    std::vector<int> splat_d(static_cast<size_t>(plane), -1);
    std::vector<int> splat_rank(static_cast<size_t>(plane), -1);
    std::vector<int> splat_src(static_cast<size_t>(plane), -1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int d = gti[static_cast<size_t>(y) * w + x];
            const int xr = x - d;
            if (xr < 0 || xr >= w) continue;
            const int r = layers[static_cast<size_t>(top[static_cast<size_t>(y) * w + x])].rank;
            const size_t idx = static_cast<size_t>(y) * w + xr;
            if (d > splat_d[idx] || (d == splat_d[idx] && r >= splat_rank[idx])) {
                splat_d[idx] = d;
                splat_rank[idx] = r;
                splat_src[idx] = x;
                for (int c = 0; c < 3; ++c)
                    rv[c * plane + static_cast<int64_t>(y) * w + xr] =
                        lv[c * plane + static_cast<int64_t>(y) * w + x];
            }
        }
    }

    // Disoccluded right pixels have no left correspondence; extend the
    // background texture so the right image has no seams.
    const Layer& bg = layers[0];
    for (int y = 0; y < h; ++y) {
        for (int xr = 0; xr < w; ++xr) {
            const size_t idx = static_cast<size_t>(y) * w + xr;
            if (splat_src[idx] >= 0) continue;
            const int d0 = disparity_at(bg, std::clamp(xr, 0, w - 1));
            for (int c = 0; c < 3; ++c)
                rv[c * plane + static_cast<int64_t>(y) * w + xr] = tex_at(bg.tex, c, y, xr + d0);
        }
    }

    // Validity: in frame and not occluded by a nearer splat.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int d = gti[static_cast<size_t>(y) * w + x];
            const int xr = x - d;
            const bool ok = xr >= 0 && xr < w &&
                            splat_src[static_cast<size_t>(y) * w + xr] == x;
            mv[static_cast<size_t>(y) * w + x] = ok ? 1.0f : 0.0f;
        }
    }
    return s;
}

std::vector<StereoSample> gen_synthetic_set(SceneSpec spec, int n, uint32_t base_seed) {
    std::vector<StereoSample> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        spec.seed = base_seed + static_cast<uint32_t>(i);
        out.push_back(gen_synthetic(spec));
    }
    return out;
}

} // namespace adcp
