/* Copyright 2026 The bseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. */
#ifndef BSEG_TOOLS_BSEG_CLI_HPP
#define BSEG_TOOLS_BSEG_CLI_HPP

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bseg/bseg.hpp"

namespace bseg::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitDivergence = 3,
    kExitCheckpoint = 4,
};

/// Thrown for anything wrong with flags, config files or input paths.
struct ConfigError : Error {
    using Error::Error;
};

inline data::Size2 parse_size(const std::string& text)
{
    const auto x = text.find('x');
    std::size_t h = 0, w = 0;
    try {
        if (x == std::string::npos)
            throw ConfigError("");
        std::size_t used = 0;
        h = std::stoul(text.substr(0, x), &used);
        if (used != x)
            throw ConfigError("");
        w = std::stoul(text.substr(x + 1), &used);
        if (used != text.size() - x - 1)
            throw ConfigError("");
    } catch (const std::exception&) {
        throw ConfigError("size '" + text + "' must look like HxW, e.g. 64x64");
    }
    return {h, w};
}

/**
 * `key = value` lines; `#` starts a comment. Keys are option names without
 * the leading dashes, with `_` and `-` interchangeable.
 */
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text,
                                                                          const std::string& origin)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out.emplace_back(key, value);
    }
    return out;
}

struct CommonOptions {
    std::string config;
    std::size_t threads = 1;
    std::uint64_t seed = 1;
};

struct TrainOptions {
    std::string data;
    std::size_t synthetic = 0;
    std::string size = "64x64";
    std::string out;
    train::TrainConfig cfg;
    bool augment = false;
    data::AugmentConfig aug;
};

struct EvalOptions {
    std::string checkpoint;
    std::string data;
    std::string predictions;
    std::string out;
    std::size_t samples = 1;
    bool float32 = false;
};

struct SegmentOptions {
    std::string checkpoint;
    std::vector<std::string> inputs;
    std::string out;
    std::size_t samples = 1;
    bool float32 = false;
};

struct RemapOptions {
    std::vector<std::string> inputs;
    std::string mapping;
    std::string legend;
    std::string out;
    bool strict = false;
    bool print_mapping = false;
};

struct SynthOptions {
    std::size_t count = 8;
    std::string size = "64x64";
    std::string out;
};

struct GradcheckOptions {
    std::size_t seeds_per_op = diag::kDefaultSeedsPerOp;
    bool skip_model = false;
};

namespace detail {

inline void require_out_dir(const std::string& out)
{
    if (out.empty())
        throw ConfigError("--out is required");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
}

/// Expands directories into their PNG files; plain files pass through.
inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs)
{
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            const auto pngs = data::list_pngs(in);
            out.insert(out.end(), pngs.begin(), pngs.end());
        } else if (fs::is_regular_file(in)) {
            out.emplace_back(in);
        } else {
            throw ConfigError("input '" + in + "' does not exist");
        }
    }
    if (out.empty())
        throw ConfigError("no input PNG files");
    return out;
}

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f)
        throw Error("cannot write " + path.string());
}

inline std::string step_name(std::size_t step)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%06zu.bseg", step);
    return buf;
}

template <typename T>
int run_train(const CommonOptions& common, TrainOptions opt, std::ostream& out)
{
    if (opt.data.empty() == (opt.synthetic == 0))
        throw ConfigError("train needs exactly one of --data DIR or --synthetic N");
    opt.cfg.seed = common.seed;
    opt.cfg.input_size = parse_size(opt.size);
    if (opt.augment)
        opt.cfg.augment = opt.aug;
    try {
        opt.cfg.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!opt.data.empty() && !fs::is_directory(opt.data))
        throw ConfigError("dataset directory '" + opt.data + "' does not exist");
    require_out_dir(opt.out);

    const auto dataset = opt.synthetic > 0 ? data::synthetic_dataset<T>(opt.synthetic, common.seed, opt.cfg.input_size)
                                           : data::load_dataset_dir<T>(opt.data);
    const fs::path out_dir(opt.out);
    train::TrainHooks<T> hooks;
    hooks.on_checkpoint = [&](std::size_t step, const model::SegNet<T>& net) {
        model::save_checkpoint(net, out_dir / step_name(step));
    };
    const auto result = train::train(opt.cfg, dataset, hooks);
    model::save_checkpoint(result.model, out_dir / "model.bseg");
    write_text(out_dir / "loss.csv", train::render_loss_csv(result.curve));
    if (!result.curve.empty()) {
        const auto& last = result.curve.back();
        out << "trained " << last.step << " steps, final loss " << last.loss << ", p_center " << last.p_center
            << ", p_output " << last.p_output << "\n";
    } else {
        out << "trained 0 steps\n";
    }
    return kExitOk;
}

template <typename T>
int eval_with(const model::SegNet<double>& net64, const CommonOptions& common, const EvalOptions& opt,
              std::vector<data::SampleRecord<double>>& dataset, train::EvalReport& report)
{
    const auto net = net64.template cast<T>();
    std::vector<data::SampleRecord<T>> records;
    for (const auto& r : dataset)
        records.push_back(data::cast_record<T>(r));
    report = train::evaluate(net, records, opt.samples, RngStream(common.seed), common.threads);
    return kExitOk;
}

inline int run_eval(const CommonOptions& common, const EvalOptions& opt, std::ostream& out)
{
    if (opt.data.empty())
        throw ConfigError("eval needs --data DIR (with images/ and masks/, or masks only with --predictions)");
    if (opt.checkpoint.empty() == opt.predictions.empty())
        throw ConfigError("eval needs exactly one of --checkpoint FILE or --predictions DIR");
    if (opt.samples < 1)
        throw ConfigError("--samples must be at least 1");
    if (!fs::is_directory(opt.data))
        throw ConfigError("dataset directory '" + opt.data + "' does not exist");
    require_out_dir(opt.out);

    train::EvalReport report;
    if (!opt.predictions.empty()) {
        if (!fs::is_directory(opt.predictions))
            throw ConfigError("predictions directory '" + opt.predictions + "' does not exist");
        const fs::path mask_dir = fs::path(opt.data) / "masks";
        const auto truth_files = data::list_pngs(fs::is_directory(mask_dir) ? mask_dir : fs::path(opt.data));
        std::vector<std::string> stems;
        std::vector<Mask> truths;
        for (const auto& f : truth_files) {
            stems.push_back(f.stem().string());
            truths.push_back(data::load_mask(f));
        }
        report = train::evaluate_masks(data::load_mask_dir(opt.predictions, stems), truths);
    } else {
        const auto net = model::load_checkpoint<double>(opt.checkpoint);
        auto dataset = data::load_dataset_dir<double>(opt.data);
        if (opt.float32)
            eval_with<float>(net, common, opt, dataset, report);
        else
            eval_with<double>(net, common, opt, dataset, report);
    }
    const std::string tsv = train::render_report_tsv(report);
    write_text(fs::path(opt.out) / "report.tsv", tsv);
    write_text(fs::path(opt.out) / "report.json", train::render_report_json(report));
    out << tsv;
    return kExitOk;
}

template <typename T>
void segment_with(const model::SegNet<double>& net64, const CommonOptions& common, const SegmentOptions& opt,
                  const std::vector<fs::path>& files, std::ostream& out)
{
    const auto net = net64.template cast<T>();
    const fs::path out_dir(opt.out);
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto image = data::load_image<T>(files[i]);
        const auto seg = train::segment_image(net, image, opt.samples, RngStream(common.seed).derive(i),
                                              model::McOptions{true, common.threads});
        const std::string stem = files[i].stem().string();
        data::save_mask(out_dir / (stem + "_labels.png"), seg.labels);
        data::write_png(out_dir / (stem + "_color.png"), train::colorize(seg.labels));
        if (seg.variance)
            data::write_png(out_dir / (stem + "_uncertainty.png"), train::uncertainty_map(*seg.variance));
        out << files[i].string() << " -> " << (out_dir / stem).string() << "_*.png\n";
    }
}

inline int run_segment(const CommonOptions& common, const SegmentOptions& opt, std::ostream& out)
{
    if (opt.checkpoint.empty())
        throw ConfigError("segment needs --checkpoint FILE");
    if (opt.inputs.empty())
        throw ConfigError("segment needs at least one --input PATH");
    if (opt.samples < 1)
        throw ConfigError("--samples must be at least 1");
    const auto files = expand_inputs(opt.inputs);
    require_out_dir(opt.out);
    const auto net = model::load_checkpoint<double>(opt.checkpoint);
    if (opt.float32)
        segment_with<float>(net, common, opt, files, out);
    else
        segment_with<double>(net, common, opt, files, out);
    return kExitOk;
}

inline int run_remap(const RemapOptions& opt, std::ostream& out)
{
    if (opt.print_mapping) {
        out << data::standard_mapping_text();
        return kExitOk;
    }
    if (opt.inputs.empty())
        throw ConfigError("remap needs at least one --input PATH");
    const auto files = expand_inputs(opt.inputs);
    const data::SourceLegend legend =
        opt.legend.empty() ? data::SourceLegend::standard() : data::SourceLegend::parse(data::read_text_file(opt.legend));
    data::RemapTable table = opt.mapping.empty() ? data::RemapTable::standard(legend)
                                                 : data::RemapTable::parse(data::read_text_file(opt.mapping), legend);
    if (opt.strict)
        table.set_default(std::nullopt);
    require_out_dir(opt.out);
    for (const auto& f : files) {
        const fs::path target = fs::path(opt.out) / f.filename();
        if (fs::exists(target) && fs::equivalent(target, f))
            throw ConfigError("remap would overwrite its input " + f.string());
        data::save_mask(target, data::remap_mask(data::load_mask(f), table));
    }
    out << "remapped " << files.size() << " mask(s)\n";
    return kExitOk;
}

inline int run_synth(const CommonOptions& common, const SynthOptions& opt, std::ostream& out)
{
    if (opt.count < 1)
        throw ConfigError("--count must be at least 1");
    const auto size = parse_size(opt.size);
    try {
        data::require_network_size(size);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    require_out_dir(opt.out);
    data::save_dataset_dir(opt.out, data::synthetic_dataset<double>(opt.count, common.seed, size));
    out << "wrote " << opt.count << " synthetic records to " << opt.out << "\n";
    return kExitOk;
}

inline int run_gradcheck(const CommonOptions& common, const GradcheckOptions& opt, std::ostream& out)
{
    if (opt.seeds_per_op < 1)
        throw ConfigError("--seeds-per-op must be at least 1");
    const auto results = diag::run_gradient_suite(common.seed, opt.seeds_per_op, !opt.skip_model);
    bool ok = true;
    char line[160];
    for (const auto& r : results) {
        const bool pass = r.worst_error < diag::kGradientTolerance;
        ok = ok && pass;
        std::snprintf(line, sizeof(line), "%-30s max_rel_err=%.3e  h=%.0e  seeds=%zu  coords=%zu  %s\n",
                      r.op.c_str(), r.worst_error, r.step, r.seeds, r.coordinates, pass ? "ok" : "FAIL");
        out << line;
    }
    return ok ? kExitOk : kExitFailure;
}

} // namespace detail

/**
 * Entry point shared by the executable and the tests. `args` excludes the
 * program name. Returns the process exit code.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Bayesian SegNet body-part segmentation", "bseg"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "File of 'key = value' lines; flags given here win");
        sub->add_option("--threads", common.threads, "Worker cap for parallel evaluation")->check(CLI::PositiveNumber);
        sub->add_option("--seed", common.seed, "Seed for every random choice");
    };

    TrainOptions topt;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset directory or synthetic data");
    add_common(train_cmd);
    train_cmd->add_option("--data", topt.data, "Dataset root with images/ and masks/");
    train_cmd->add_option("--synthetic", topt.synthetic, "Train on N generated records instead");
    train_cmd->add_option("--size", topt.size, "Network input size HxW (multiples of 32)");
    train_cmd->add_option("--out", topt.out, "Output directory")->required();
    train_cmd->add_option("--steps", topt.cfg.steps, "Optimizer steps");
    train_cmd->add_option("--batch-size", topt.cfg.batch_size, "Records per step");
    train_cmd->add_option("--lr", topt.cfg.lr, "Learning rate");
    train_cmd->add_option("--momentum", topt.cfg.momentum, "SGD momentum");
    train_cmd->add_option("--w-factor", topt.cfg.factors.weight, "Weight regularizer factor");
    train_cmd->add_option("--d-factor", topt.cfg.factors.dropout, "Dropout regularizer factor");
    train_cmd->add_option("--checkpoint-every", topt.cfg.checkpoint_every, "Write a checkpoint every N steps (0: off)");
    train_cmd->add_flag("--augment", topt.augment, "Enable flip and colour jitter");
    train_cmd->add_option("--flip-prob", topt.aug.flip_prob, "Horizontal flip probability");
    train_cmd->add_option("--brightness", topt.aug.brightness, "Brightness half-range");
    train_cmd->add_option("--contrast", topt.aug.contrast, "Contrast half-range");
    train_cmd->add_option("--saturation", topt.aug.saturation, "Saturation half-range");
    train_cmd->add_option("--hue", topt.aug.hue, "Hue rotation half-range (turns)");

    EvalOptions eopt;
    auto* eval_cmd = app.add_subcommand("eval", "Per-class Dice report");
    add_common(eval_cmd);
    eval_cmd->add_option("--checkpoint", eopt.checkpoint, "Model checkpoint");
    eval_cmd->add_option("--data", eopt.data, "Dataset root with images/ and masks/");
    eval_cmd->add_option("--predictions", eopt.predictions, "Score these label masks instead of running a model");
    eval_cmd->add_option("--samples", eopt.samples, "MC dropout samples per image (1: deterministic)");
    eval_cmd->add_option("--out", eopt.out, "Output directory")->required();
    eval_cmd->add_flag("--float32", eopt.float32, "Run inference in 32-bit floats");

    SegmentOptions sopt;
    auto* segment_cmd = app.add_subcommand("segment", "Label masks, colour renderings and uncertainty maps");
    add_common(segment_cmd);
    segment_cmd->add_option("--checkpoint", sopt.checkpoint, "Model checkpoint");
    segment_cmd->add_option("--input", sopt.inputs, "Image PNG or directory of PNGs")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    segment_cmd->add_option("--samples", sopt.samples, "MC dropout samples (uncertainty map when > 1)");
    segment_cmd->add_option("--out", sopt.out, "Output directory")->required();
    segment_cmd->add_flag("--float32", sopt.float32, "Run inference in 32-bit floats");

    RemapOptions ropt;
    auto* remap_cmd = app.add_subcommand("remap", "Relabel exported part masks into the 12 classes");
    add_common(remap_cmd);
    remap_cmd->add_option("--input", ropt.inputs, "Source mask PNG or directory")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    remap_cmd->add_option("--mapping", ropt.mapping, "Mapping file of source_name<TAB>label lines");
    remap_cmd->add_option("--legend", ropt.legend, "Legend file of source_name<TAB>code lines");
    remap_cmd->add_option("--out", ropt.out, "Output directory");
    remap_cmd->add_flag("--strict", ropt.strict, "Reject codes missing from the table instead of mapping them to 0");
    remap_cmd->add_flag("--print-mapping", ropt.print_mapping, "Print the standard mapping file and exit");

    SynthOptions yopt;
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic dataset to disk");
    add_common(synth_cmd);
    synth_cmd->add_option("--count", yopt.count, "Number of records");
    synth_cmd->add_option("--size", yopt.size, "Canvas size HxW (multiples of 32)");
    synth_cmd->add_option("--out", yopt.out, "Output directory")->required();

    GradcheckOptions gopt;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare every analytic gradient with finite differences");
    add_common(grad_cmd);
    grad_cmd->add_option("--seeds-per-op", gopt.seeds_per_op, "Random cases per op");
    grad_cmd->add_flag("--skip-model", gopt.skip_model, "Skip the end-to-end network checks");

    try {
        std::vector<std::string> tokens = args;
        // config values go first so that later command-line flags override them
        if (!tokens.empty()) {
            CLI::App* sub = nullptr;
            for (auto* s : app.get_subcommands([](CLI::App*) { return true; }))
                if (s->get_name() == tokens[0])
                    sub = s;
            std::optional<std::string> config_path;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                if (tokens[i] == "--config" && i + 1 < tokens.size())
                    config_path = tokens[i + 1];
                else if (tokens[i].rfind("--config=", 0) == 0)
                    config_path = tokens[i].substr(9);
            }
            if (sub && config_path) {
                std::ifstream f(*config_path, std::ios::binary);
                if (!f)
                    throw ConfigError("cannot read config file '" + *config_path + "'");
                std::stringstream ss;
                ss << f.rdbuf();
                std::vector<std::string> injected;
                for (const auto& [key, value] : parse_config_text(ss.str(), *config_path)) {
                    std::string flag = key;
                    std::replace(flag.begin(), flag.end(), '_', '-');
                    if (flag == "config")
                        throw ConfigError(*config_path + ": config files cannot include other config files");
                    if (sub->get_option_no_throw("--" + flag) == nullptr)
                        throw ConfigError(*config_path + ": unknown key '" + key + "' for " + sub->get_name());
                    injected.push_back("--" + flag + "=" + value);
                }
                tokens.insert(tokens.begin() + 1, injected.begin(), injected.end());
            }
        }
        std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
        app.parse(reversed);

        if (*train_cmd)
            return detail::run_train<double>(common, topt, out);
        if (*eval_cmd)
            return detail::run_eval(common, eopt, out);
        if (*segment_cmd)
            return detail::run_segment(common, sopt, out);
        if (*remap_cmd)
            return detail::run_remap(ropt, out);
        if (*synth_cmd)
            return detail::run_synth(common, yopt, out);
        if (*grad_cmd)
            return detail::run_gradcheck(common, gopt, out);
        return kExitConfig;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckpoint;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace bseg::cli

#endif
