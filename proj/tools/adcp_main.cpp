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

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "adcp/checkpoint.hpp"
#include "adcp/config.hpp"
#include "adcp/selftest.hpp"
#include "adcp/synthetic.hpp"

namespace {

using namespace adcp;

int env_threads() {
    const char* v = std::getenv("ADCP_THREADS");
    if (!v) return 1;
    const int t = std::atoi(v);
    return t >= 1 ? t : 1;
}

std::vector<StereoSample> build_set(const DataSection& data, int count, uint32_t seed_base,
                                    const std::string& dir) {
    if (data.source == "synthetic") {
        return gen_synthetic_set(data.scene, count, seed_base);
    }
    if (data.source == "dir") {
        check(!dir.empty(), "config: data.source=dir needs the directory key for this command");
        return load_dataset_dir(dir);
    }
    fail("config: data.source must be 'synthetic' or 'dir', got '", data.source, "'");
}

std::vector<StereoSample> build_train_set(const RunConfig& rc) {
    return build_set(rc.data, rc.data.train_count, rc.data.seed, rc.data.train_dir);
}

std::vector<StereoSample> build_val_set(const RunConfig& rc) {
    // Validation seeds live far from the training block so the sets are disjoint.
    return build_set(rc.data, rc.data.val_count, rc.data.seed + 50000u, rc.data.val_dir);
}

std::vector<StereoSample> build_eval_set(const RunConfig& rc) {
    const std::string dir = rc.data.eval_dir.empty() ? rc.data.val_dir : rc.data.eval_dir;
    return build_set(rc.data, rc.data.val_count, rc.data.seed + 50000u, dir);
}

void write_report(const std::vector<std::pair<std::string, double>>& kv, std::ostream& os) {
    os << std::setprecision(9);
    for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
}

int cmd_train(const std::string& config_path, int seed_override, const std::string& out_override) {
    RunConfig rc = parse_config_file(config_path);
    if (seed_override >= 0) rc.train.seed = static_cast<uint32_t>(seed_override);
    if (!out_override.empty()) rc.train.checkpoint = out_override;
    if (!rc.train.resume.empty())
        check(std::filesystem::exists(rc.train.resume), "train: resume checkpoint not found: ",
              rc.train.resume);
    if (rc.data.source == "dir")
        check(std::filesystem::is_directory(rc.data.train_dir), "train: data.train_dir not found: ",
              rc.data.train_dir);

    const ModelConfig mc = rc.model.to_model_config();
    const auto train_set = build_train_set(rc);
    const auto val_set = rc.train.val_period > 0 ? build_val_set(rc) : std::vector<StereoSample>{};

    Model<float> model;
    AdamState<float> adam;
    Rng rng(rc.train.seed);
    int64_t start_iter = 0;
    if (!rc.train.resume.empty()) {
        Checkpoint ck = load_checkpoint(rc.train.resume);
        model = ck.restore_model();
        adam = ck.adam;
        start_iter = ck.iter;
        if (!ck.rng_state.empty()) {
            std::istringstream is(ck.rng_state);
            is >> rng;
        }
        std::cout << "resumed from " << rc.train.resume << " at iteration " << start_iter << "\n";
    } else {
        model = Model<float>::init(mc, rc.train.seed);
    }

    const std::string log_path = rc.train.log.empty() ? rc.train.checkpoint + ".log" : rc.train.log;
    std::ofstream log(log_path, start_iter > 0 ? std::ios::app : std::ios::trunc);
    check(log.good(), "train: cannot write log ", log_path);

    TrainOptions opt;
    opt.iters = rc.train.iters;
    opt.batch = rc.train.batch;
    opt.lr = rc.train.lr;
    opt.lr_half_period = rc.train.lr_half_period;
    opt.seed = rc.train.seed;
    opt.crop_h = rc.train.crop_h;
    opt.crop_w = rc.train.crop_w;
    opt.val_period = rc.train.val_period;
    opt.log_period = rc.train.log_period;
    opt.eval_threads = env_threads();
    opt.log = &log;

    const TrainResult res = train(model, train_set, val_set, opt, adam, rng, start_iter);

    Checkpoint ck = Checkpoint::capture(model, adam, res.next_iter, rng);
    save_checkpoint(ck, rc.train.checkpoint);
    std::cout << "trained " << opt.iters << " iterations, final loss " << res.final_loss << "\n"
              << "checkpoint: " << rc.train.checkpoint << "\nlog: " << log_path << "\n";
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& out_override) {
    RunConfig rc = parse_config_file(config_path);
    if (!out_override.empty()) rc.eval.report = out_override;
    check(!rc.eval.checkpoint.empty(), "eval: config needs eval.checkpoint");
    check(std::filesystem::exists(rc.eval.checkpoint), "eval: checkpoint not found: ",
          rc.eval.checkpoint);

    Checkpoint ck = load_checkpoint(rc.eval.checkpoint);
    Model<float> model = ck.restore_model();
    const auto set = build_eval_set(rc);
    const EvalReport rep = evaluate(model, set, env_threads());

    write_report(rep.to_kv(), std::cout);
    if (!rc.eval.report.empty()) {
        std::ofstream out(rc.eval.report);
        check(out.good(), "eval: cannot write report ", rc.eval.report);
        write_report(rep.to_kv(), out);
        std::cout << "report: " << rc.eval.report << "\n";
    }
    return 0;
}

int cmd_predict(const std::string& config_path, const std::string& left_path,
                const std::string& right_path, const std::string& out_base) {
    RunConfig rc = parse_config_file(config_path);
    check(!rc.predict.checkpoint.empty(), "predict: config needs predict.checkpoint");
    for (const std::string& p : {rc.predict.checkpoint, left_path, right_path})
        check(std::filesystem::exists(p), "predict: file not found: ", p);

    Checkpoint ck = load_checkpoint(rc.predict.checkpoint);
    Model<float> model = ck.restore_model();

    Tensor<float> left = load_image(left_path);
    Tensor<float> right = load_image(right_path);
    check(left.shape() == right.shape(), "predict: left/right sizes differ");
    const int h = left.dim(1), w = left.dim(2);
    normalize_image(left);
    normalize_image(right);
    left = pad_to_multiple(left, 16);
    right = pad_to_multiple(right, 16);

    ForwardOut<float> o = forward(model, left, right);
    Tensor<float> disp = o.full_res;
    if (disp.dim(0) != h || disp.dim(1) != w) disp = crop_last2(disp, 0, 0, h, w);

    const double gray = rc.predict.gray_scale > 0.0 ? rc.predict.gray_scale
                                                    : 255.0 / model.cfg.Dmax;
    save_pfm(disp, out_base + ".pfm");
    export_gray(disp, out_base + ".pgm", gray);
    std::cout << "disparity: " << out_base << ".pfm\nvisualization: " << out_base << ".pgm\n";
    return 0;
}

struct AblateRow {
    std::string variant;
    int n = 0;
    double epe = 0.0;
    double d1 = 0.0;
    uint64_t stage2_flops = 0;
    int64_t params = 0;
};

ModelConfig variant_config(const ModelConfig& base, const std::string& variant) {
    ModelConfig cfg = base;
    if (variant == "baseline") {
        cfg.offsets = OffsetMode::constant;
        cfg.agg2 = Agg2Mode::conv3d;
    } else if (variant == "const_dic") {
        cfg.offsets = OffsetMode::constant;
        cfg.agg2 = Agg2Mode::dic;
    } else if (variant == "dop_conv3d") {
        cfg.offsets = OffsetMode::dop;
        cfg.agg2 = Agg2Mode::conv3d;
    } else if (variant == "dop_dic") {
        cfg.offsets = OffsetMode::dop;
        cfg.agg2 = Agg2Mode::dic;
    } else {
        fail("ablate: unknown variant '", variant,
             "' (expected baseline, const_dic, dop_conv3d or dop_dic)");
    }
    return cfg;
}

int cmd_ablate(const std::string& config_path, int seed_override, const std::string& out_override) {
    RunConfig rc = parse_config_file(config_path);
    if (seed_override >= 0) rc.ablate.seed = static_cast<uint32_t>(seed_override);
    if (!out_override.empty()) rc.ablate.report = out_override;
    check(rc.data.source == "synthetic", "ablate: only synthetic data is supported");
    check(!rc.ablate.variants.empty() && !rc.ablate.n_values.empty(),
          "ablate: variants and n_values must be nonempty");

    const ModelConfig base = rc.model.to_model_config();
    const auto train_set = build_train_set(rc);
    const auto val_set = build_val_set(rc);

    std::vector<AblateRow> rows;
    for (const std::string& variant : rc.ablate.variants) {
        for (int n : rc.ablate.n_values) {
            ModelConfig cfg = variant_config(base, variant);
            cfg.N = n;
            Model<float> model = Model<float>::init(cfg, rc.ablate.seed);
            AdamState<float> adam;
            Rng rng(rc.ablate.seed);
            TrainOptions opt;
            opt.iters = rc.ablate.iters;
            opt.batch = rc.train.batch;
            opt.lr = rc.train.lr;
            opt.seed = rc.ablate.seed;
            train(model, train_set, {}, opt, adam, rng);

            const EvalReport rep = evaluate(model, val_set, env_threads());

            flops::reset();
            (void)detail::eval_one(model, val_set.front());
            AblateRow row;
            row.variant = variant;
            row.n = n;
            row.epe = rep.d22.epe;
            row.d1 = rep.d22.d1;
            row.stage2_flops = flops::total(flops::Section::stage2);
            row.params = model.param_count();
            rows.push_back(row);
            std::cout << "done: " << variant << " N=" << n << " epe=" << std::fixed
                      << std::setprecision(6) << row.epe << "\n";
        }
    }

    std::ostringstream table;
    table << std::left << std::setw(12) << "variant" << std::right << std::setw(4) << "N"
          << std::setw(12) << "epe" << std::setw(10) << "d1" << std::setw(16) << "stage2_flops"
          << std::setw(10) << "params" << "\n";
    table << std::fixed << std::setprecision(6);
    for (const auto& r : rows)
        table << std::left << std::setw(12) << r.variant << std::right << std::setw(4) << r.n
              << std::setw(12) << r.epe << std::setw(10) << std::setprecision(3) << r.d1
              << std::setprecision(6) << std::setw(16) << r.stage2_flops << std::setw(10)
              << r.params << "\n";
    std::cout << table.str();
    if (!rc.ablate.report.empty()) {
        std::ofstream out(rc.ablate.report);
        check(out.good(), "ablate: cannot write report ", rc.ablate.report);
        out << table.str();
        std::cout << "report: " << rc.ablate.report << "\n";
    }
    return 0;
}

int cmd_selftest() {
    const selftest::Report rep = selftest::run();
    selftest::print(rep, std::cout);
    return rep.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage coarse-to-fine stereo matcher"};
    app.require_subcommand(1);

    std::string config_path, out_path, left_path, right_path;
    int seed = -1;

    auto* train = app.add_subcommand("train", "train a model from a config file");
    train->add_option("--config", config_path, "run configuration")->required();
    train->add_option("--seed", seed, "override train.seed");
    train->add_option("--out", out_path, "override checkpoint path");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("--config", config_path, "run configuration")->required();
    eval->add_option("--out", out_path, "override report path");

    auto* predict = app.add_subcommand("predict", "predict disparity for one stereo pair");
    predict->add_option("--config", config_path, "run configuration")->required();
    predict->add_option("--left", left_path, "left image (png/ppm/pgm)")->required();
    predict->add_option("--right", right_path, "right image (png/ppm/pgm)")->required();
    predict->add_option("--out", out_path, "output base path")->required();

    auto* ablate = app.add_subcommand("ablate", "train and compare module variants");
    ablate->add_option("--config", config_path, "run configuration")->required();
    ablate->add_option("--seed", seed, "override ablate.seed");
    ablate->add_option("--out", out_path, "override report path");

    auto* selftest_cmd = app.add_subcommand("selftest", "run built-in numerical checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(train)) return cmd_train(config_path, seed, out_path);
        if (app.got_subcommand(eval)) return cmd_eval(config_path, out_path);
        if (app.got_subcommand(predict))
            return cmd_predict(config_path, left_path, right_path, out_path);
        if (app.got_subcommand(ablate)) return cmd_ablate(config_path, seed, out_path);
        if (app.got_subcommand(selftest_cmd)) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
