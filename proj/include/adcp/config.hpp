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
#include <vector>

#include "adcp/pipeline.hpp"
#include "adcp/synthetic.hpp"

namespace adcp {

// Flat INI-style run configuration: [section] headers, key=value lines,
// '#'/';' comments. Unknown sections or keys are rejected.

struct DataSection {
    std::string source = "synthetic";  // synthetic | dir
    int train_count = 8;
    int val_count = 4;
    uint32_t seed = 100;
    SceneSpec scene;
    std::string train_dir, val_dir, eval_dir;
};

struct ModelSection {
    std::string preset = "M";  // S | M | L | custom
    int C = 0, C3d = 0, Cdop = 0;
    int N = 7;
    int dmax = 192;
    std::string offsets = "dop";  // dop | constant
    std::string agg2 = "dic";     // dic | conv3d

    ModelConfig to_model_config() const;
};

struct TrainSection {
    int iters = 1000;
    int batch = 1;
    double lr = 0.0005;
    int lr_half_period = 0;
    uint32_t seed = 1;
    int crop_w = 0, crop_h = 0;
    int val_period = 0;
    int log_period = 25;
    std::string checkpoint = "model.ckpt";
    std::string log;
    std::string resume;
};

struct EvalSection {
    std::string checkpoint;
    std::string report;
};

struct PredictSection {
    std::string checkpoint;
    double gray_scale = 0.0;  // 0 picks 255/D_max
};

struct AblateSection {
    std::vector<std::string> variants = {"baseline", "const_dic", "dop_conv3d", "dop_dic"};
    std::vector<int> n_values = {3, 5, 7, 9};
    uint32_t seed = 1;
    int iters = 200;
    std::string report;
};

struct RunConfig {
    ModelSection model;
    DataSection data;
    TrainSection train;
    EvalSection eval;
    PredictSection predict;
    AblateSection ablate;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

} // namespace adcp
