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

#include <string>
#include <utility>
#include <vector>

#include "adcp/random.hpp"
#include "adcp/tensor.hpp"

namespace adcp {

/// One rectified stereo pair with dense ground truth at full resolution.
/// Images are [3,H,W] in [0,1] until preprocess() normalizes them; valid is a
/// 0/1 map marking pixels with usable ground truth.
struct StereoSample {
    Tensor<float> left, right;  // [3,H,W]
    Tensor<float> gt;           // [H,W]
    Tensor<float> valid;        // [H,W], 0/1
};

// --- PFM (grayscale "Pf", scale sign = endianness, rows stored bottom-up) ---
Tensor<float> load_pfm(const std::string& path);
void save_pfm(const Tensor<float>& map, const std::string& path);

// --- 16-bit grayscale PNG disparity: value = raw/256, raw 0 marks invalid ---
std::pair<Tensor<float>, Tensor<float>> load_disp_png16(const std::string& path);
void save_disp_png16(const Tensor<float>& map, const Tensor<float>& valid,
                     const std::string& path);

// --- 8-bit images (PNG via libpng, PPM/PGM via the netpbm headers) ---
Tensor<float> load_image(const std::string& path);  // -> [3,H,W] in [0,1]
void save_image_ppm(const Tensor<float>& img, const std::string& path);

/// 8-bit portable graymap of a disparity map: value = clamp(round(d*scale), 0, 255).
void export_gray(const Tensor<float>& map, const std::string& path, double scale);

/// In-place color normalization, fixed constants: v -> (v - 0.5) / 0.5.
void normalize_image(Tensor<float>& img);

/// Identical random crop across left/right/gt/valid followed by color
/// normalization. Throws when the crop exceeds the image.
StereoSample preprocess(const StereoSample& s, int crop_h, int crop_w, Rng& rng);

/// Zero-pads the last two axes up to the next multiple of `mult` (right and
/// bottom); returns the padded tensor.
Tensor<float> pad_to_multiple(const Tensor<float>& t, int mult);

/// Loads a {left/, right/, disp/} directory of matching stems. Disparity may
/// be .pfm (dense, all valid where finite) or .png (16-bit convention).
std::vector<StereoSample> load_dataset_dir(const std::string& root);

} // namespace adcp
