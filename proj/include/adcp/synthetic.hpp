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

#include <cstdint>
#include <vector>

#include "adcp/data_io.hpp"

namespace adcp {

/// Deterministic synthetic scene recipe: identical specs produce
/// byte-identical samples on every platform.
struct SceneSpec {
    uint32_t seed = 0;
    int width = 96;
    int height = 64;
    int layer_count = 3;       // textured rectangles incl. full-frame background
    int disp_min = 2;          // background disparity range (pixels, full res)
    int disp_max = 24;         // upper bound, exclusive of D_max
    int thin_count = 2;        // thin vertical bars at near disparities
    int thin_min_width = 2;
    int thin_max_width = 6;
    double texture_scale = 0.15;  // spatial frequency of the procedural texture
    bool slanted = true;          // allow linearly slanted (rounded) layer disparities
};

/// Renders a layered stereo pair with dense ground truth. Layer disparities
/// are integer per column (slanted surfaces are rounded), so every
/// non-occluded left pixel matches its right sample exactly. Validity marks
/// pixels that are in frame and win the occlusion ordering (nearer layers,
/// i.e. higher disparity, win).
StereoSample gen_synthetic(const SceneSpec& spec);

/// Convenience: n samples with seeds base_seed, base_seed+1, ...
std::vector<StereoSample> gen_synthetic_set(SceneSpec spec, int n, uint32_t base_seed);

} // namespace adcp
