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

#include "adcp/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace adcp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const int r = std::stoi(v, &pos);
        check(pos == v.size(), "config: bad integer for ", key, ": '", v, "'");
        return r;
    } catch (const Error&) {
        throw;
    } catch (...) {
        fail("config: bad integer for ", key, ": '", v, "'");
    }
}

double to_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double r = std::stod(v, &pos);
        check(pos == v.size(), "config: bad number for ", key, ": '", v, "'");
        return r;
    } catch (const Error&) {
        throw;
    } catch (...) {
        fail("config: bad number for ", key, ": '", v, "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& value, const std::string& key)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> s = [] {
        std::map<std::string, std::map<std::string, Setter>> m;
        auto& model = m["model"];
        model["preset"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.model.preset = v;
        };
        model["c"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.model.C = to_int(v, k);
        };
        model["c3d"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.model.C3d = to_int(v, k);
        };
        model["cdop"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.model.Cdop = to_int(v, k);
        };
        model["n"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.model.N = to_int(v, k);
        };
        model["dmax"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.model.dmax = to_int(v, k);
        };
        model["offsets"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.model.offsets = v;
        };
        model["agg2"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.model.agg2 = v;
        };

        auto& data = m["data"];
        data["source"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.data.source = v;
        };
        data["train_count"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.train_count = to_int(v, k);
        };
        data["val_count"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.val_count = to_int(v, k);
        };
        data["seed"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.seed = static_cast<uint32_t>(to_int(v, k));
        };
        data["width"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.width = to_int(v, k);
        };
        data["height"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.height = to_int(v, k);
        };
        data["layers"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.layer_count = to_int(v, k);
        };
        data["disp_min"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.disp_min = to_int(v, k);
        };
        data["disp_max"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.disp_max = to_int(v, k);
        };
        data["thin_count"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.thin_count = to_int(v, k);
        };
        data["thin_min_width"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.thin_min_width = to_int(v, k);
        };
        data["thin_max_width"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.thin_max_width = to_int(v, k);
        };
        data["texture_scale"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.texture_scale = to_double(v, k);
        };
        data["slanted"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.data.scene.slanted = to_int(v, k) != 0;
        };
        data["train_dir"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.data.train_dir = v;
        };
        data["val_dir"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.data.val_dir = v;
        };
        data["eval_dir"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.data.eval_dir = v;
        };

        auto& train = m["train"];
        train["iters"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.iters = to_int(v, k);
        };
        train["batch"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.batch = to_int(v, k);
        };
        train["lr"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.lr = to_double(v, k);
        };
        train["lr_half_period"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.lr_half_period = to_int(v, k);
        };
        train["seed"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.seed = static_cast<uint32_t>(to_int(v, k));
        };
        train["crop_w"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.crop_w = to_int(v, k);
        };
        train["crop_h"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.crop_h = to_int(v, k);
        };
        train["val_period"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.val_period = to_int(v, k);
        };
        train["log_period"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.train.log_period = to_int(v, k);
        };
        train["checkpoint"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.train.checkpoint = v;
        };
        train["log"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.train.log = v;
        };
        train["resume"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.train.resume = v;
        };

        auto& eval = m["eval"];
        eval["checkpoint"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.eval.checkpoint = v;
        };
        eval["report"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.eval.report = v;
        };

        auto& predict = m["predict"];
        predict["checkpoint"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.predict.checkpoint = v;
        };
        predict["gray_scale"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.predict.gray_scale = to_double(v, k);
        };

        auto& ablate = m["ablate"];
        ablate["variants"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.ablate.variants = split_list(v);
        };
        ablate["n_values"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.ablate.n_values.clear();
            for (const auto& item : split_list(v)) c.ablate.n_values.push_back(to_int(item, k));
        };
        ablate["seed"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.ablate.seed = static_cast<uint32_t>(to_int(v, k));
        };
        ablate["iters"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.ablate.iters = to_int(v, k);
        };
        ablate["report"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.ablate.report = v;
        };
        return m;
    }();
    return s;
}

} // namespace

ModelConfig ModelSection::to_model_config() const {
    ModelConfig cfg;
    if (preset == "custom") {
        check(C > 0 && C3d > 0 && Cdop > 0,
              "config: model.preset=custom requires c, c3d and cdop");
        cfg.C = C;
        cfg.C3d = C3d;
        cfg.Cdop = Cdop;
        cfg.N = N;
        cfg.Dmax = dmax;
    } else {
        check(preset.size() == 1, "config: unknown model.preset '", preset, "'");
        cfg = ModelConfig::preset(preset[0], N, dmax);
    }
    if (offsets == "dop")
        cfg.offsets = OffsetMode::dop;
    else if (offsets == "constant")
        cfg.offsets = OffsetMode::constant;
    else
        fail("config: model.offsets must be 'dop' or 'constant', got '", offsets, "'");
    if (agg2 == "dic")
        cfg.agg2 = Agg2Mode::dic;
    else if (agg2 == "conv3d")
        cfg.agg2 = Agg2Mode::conv3d;
    else
        fail("config: model.agg2 must be 'dic' or 'conv3d', got '", agg2, "'");
    cfg.validate();
    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            check(line.back() == ']', "config: malformed section header at line ", lineno);
            section = trim(line.substr(1, line.size() - 2));
            check(schema().count(section) == 1, "config: unknown section [", section,
                  "] at line ", lineno);
            continue;
        }
        const auto eq = line.find('=');
        check(eq != std::string::npos, "config: expected key=value at line ", lineno, ": '", line,
              "'");
        check(!section.empty(), "config: key before any [section] at line ", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& keys = schema().at(section);
        const auto it = keys.find(key);
        check(it != keys.end(), "config: unknown key '", key, "' in section [", section, "]");
        it->second(cfg, value, section + "." + key);
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    check(in.good(), "config: cannot open ", path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace adcp
