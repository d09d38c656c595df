//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/bench.hpp"
#include "edgecnn/dataset.hpp"
#include "edgecnn/errors.hpp"
#include "edgecnn/generator.hpp"
#include "edgecnn/image.hpp"
#include "edgecnn/model_io.hpp"
#include "edgecnn/report.hpp"
#include "edgecnn/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace edgecnn;

namespace
{

enum ExitCode
{
    kOk         = 0,
    kUsage      = 1,
    kInput      = 2,
    kInfeasible = 3,
};

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix)
{
    return fs::path(p.string() + suffix);
}

/// Everything needed to repeat one invocation: the argument vector plus every effective flag value.
class RunManifest
{
public:
    RunManifest(int argc, char** argv)
        : started_(utc_now())
    {
        for (int i = 0; i < argc; ++i)
        {
            argv_.emplace_back(argv[i]);
        }
    }

    void write(const CLI::App& command, const fs::path& path, const ordered_json& outputs,
               std::uint64_t seed, const std::string& host_tag) const
    {
        ordered_json flags = ordered_json::object();
        for (const CLI::Option* opt : command.get_options())
        {
            const std::string name = opt->get_name();
            if (name == "--help" || name.empty())
            {
                continue;
            }
            if (opt->count() > 0)
            {
                const auto& r = opt->results();
                flags[name]   = r.size() == 1 ? ordered_json(r.front()) : ordered_json(r);
            }
            else
            {
                flags[name] = opt->get_default_str();
            }
        }
        ordered_json j;
        j["command"]      = command.get_name();
        j["argv"]         = argv_;
        j["flags"]        = flags;
        j["seed"]         = seed;
        j["tool_version"] = EDGECNN_VERSION;
        j["host_tag"]     = host_tag.empty() ? ordered_json(nullptr) : ordered_json(host_tag);
        j["started_utc"]  = started_;
        j["finished_utc"] = utc_now();
        j["outputs"]      = outputs;

        std::ofstream out(path);
        out << j.dump(2) << '\n';
        if (!out)
        {
            throw IoError("cannot write " + path.string());
        }
    }

private:
    std::vector<std::string> argv_;
    std::string started_;
};

Grid grid_from_flag(const std::string& name)
{
    if (name == "builtin-table3")
    {
        return Grid::builtin_conv2d();
    }
    if (name == "builtin-table4")
    {
        return Grid::builtin_depthwise();
    }
    return load_grid(name);
}

std::vector<fs::path> model_files(const fs::path& models)
{
    if (!fs::exists(models))
    {
        throw IoError("no such file or directory: " + models.string());
    }
    if (!fs::is_directory(models))
    {
        return { models };
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(models))
    {
        if (entry.is_regular_file() && entry.path().extension() == ".cnnm")
        {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
    {
        throw IoError("no .cnnm files in " + models.string());
    }
    return files;
}

void print_warnings(const Dataset& ds)
{
    for (const std::string& w : ds.warnings)
    {
        std::cerr << "warning: skipped " << w << '\n';
    }
}

void print_metrics(const std::string& label, const Metrics& m)
{
    std::printf("%s accuracy=%.6f loss=%.6f correct=%zu total=%zu\n", label.c_str(), m.accuracy, m.loss, m.correct,
                m.total);
}

}    // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "edgecnn: generate, benchmark, train and inspect small CNNs for edge cameras" };
    app.set_version_flag("--version", std::string(EDGECNN_VERSION));
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    // generate
    std::string gen_family;
    std::string gen_grid;
    std::string gen_profile = "sipeed-like";
    std::uint64_t gen_seed  = 0;
    fs::path gen_out;
    CLI::App* generate = app.add_subcommand("generate", "Write every feasible grid point as a model file");
    generate->add_option("--family", gen_family, "conv2d or depthwise; must agree with the grid")
        ->check(CLI::IsMember({ "conv2d", "depthwise" }));
    generate->add_option("--grid", gen_grid, "builtin-table3, builtin-table4 or a grid JSON file")->required();
    generate->add_option("--profile", gen_profile, "sipeed-like, unconstrained or a profile JSON file");
    generate->add_option("--seed", gen_seed);
    generate->add_option("--out", gen_out, "Output directory")->required();

    // bench
    fs::path bench_models;
    BenchConfig bench_cfg;
    std::string bench_input = "random";
    std::string bench_group = "params";
    fs::path bench_out;
    CLI::App* bench = app.add_subcommand("bench", "Time forward passes of model files");
    bench->add_option("--models", bench_models, "Model file or directory of .cnnm files")->required();
    bench->add_option("--runs", bench_cfg.measured_runs);
    bench->add_option("--warmup", bench_cfg.warmup_runs);
    bench->add_option("--input", bench_input, "random or an image file");
    bench->add_option("--seed", bench_cfg.seed);
    bench->add_option("--host-tag", bench_cfg.host_tag);
    bench->add_option("--group-by", bench_group, "Row order of the report");
    bench->add_option("--out", bench_out, "Report CSV")->required();

    // train
    fs::path train_model;
    fs::path train_data;
    TrainConfig train_cfg;
    double train_ratio = 0.8;
    fs::path train_out;
    fs::path train_history;
    CLI::App* train_cmd = app.add_subcommand("train", "Fit a model to an image directory");
    train_cmd->add_option("--model", train_model)->required();
    train_cmd->add_option("--data", train_data, "Directory with one subdirectory per class")->required();
    train_cmd->add_option("--epochs", train_cfg.epochs);
    train_cmd->add_option("--lr", train_cfg.learning_rate);
    train_cmd->add_option("--momentum", train_cfg.momentum);
    train_cmd->add_option("--weight-decay", train_cfg.weight_decay);
    train_cmd->add_option("--batch", train_cfg.batch_size);
    train_cmd->add_option("--seed", train_cfg.seed, "Seeds both the split and the shuffle");
    train_cmd->add_option("--train-ratio", train_ratio);
    train_cmd->add_option("--freeze", train_cfg.freeze, "Comma-separated layer indices")->delimiter(',');
    train_cmd->add_option("--out", train_out, "Trained model file")->required();
    train_cmd->add_option("--history", train_history, "History CSV (default: <out>.history.csv)");

    // eval
    fs::path eval_model;
    fs::path eval_data;
    std::string eval_split = "validation";
    double eval_ratio      = 0.8;
    std::uint64_t eval_seed = 0;
    fs::path eval_out;
    CLI::App* eval = app.add_subcommand("eval", "Accuracy and loss of a model on one split");
    eval->add_option("--model", eval_model)->required();
    eval->add_option("--data", eval_data)->required();
    eval->add_option("--split", eval_split, "train, validation or all");
    eval->add_option("--train-ratio", eval_ratio);
    eval->add_option("--seed", eval_seed, "Split seed; use the value given to train");
    eval->add_option("--out", eval_out, "Metrics CSV");

    // saliency
    fs::path sal_model;
    fs::path sal_image;
    fs::path sal_out;
    int sal_class = -1;
    CLI::App* sal = app.add_subcommand("saliency", "Gradient saliency map of one image (dark = strong)");
    sal->add_option("--model", sal_model)->required();
    sal->add_option("--image", sal_image)->required();
    sal->add_option("--class", sal_class, "Class index; default is the predicted class");
    sal->add_option("--out", sal_out, "PNG or PPM output")->required();

    // report
    std::vector<fs::path> report_in;
    std::string report_group = "params";
    fs::path report_svg;
    fs::path report_out;
    CLI::App* report = app.add_subcommand("report", "Merge benchmark reports and draw charts");
    report->add_option("--in", report_in, "Comma-separated report CSVs")->required()->delimiter(',');
    report->add_option("--group-by", report_group, "params, blocks, filters, image or outputs");
    report->add_option("--svg", report_svg, "Directory for SVG charts");
    report->add_option("--out", report_out, "Merged CSV")->required();

    // synth
    int synth_per_class     = 100;
    int synth_edge          = 16;
    std::uint64_t synth_seed = 0;
    fs::path synth_out;
    CLI::App* synth = app.add_subcommand("synth", "Write the synthetic bright/dark image set");
    synth->add_option("--per-class", synth_per_class);
    synth->add_option("--edge", synth_edge);
    synth->add_option("--seed", synth_seed);
    synth->add_option("--out", synth_out)->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    const RunManifest manifest(argc, argv);
    try
    {
        if (generate->parsed())
        {
            const Grid grid = grid_from_flag(gen_grid);
            if (!gen_family.empty() && parse_family(gen_family) != grid.family)
            {
                throw ParameterError("--family " + gen_family + " does not match the grid family " +
                                     to_string(grid.family));
            }
            const DeviceProfile profile = resolve_profile(gen_profile);
            const SuiteManifest suite   = generate_suite(grid, profile, gen_seed, gen_out);
            std::printf("%zu of %zu grid points feasible under %s\n", suite.feasible_count, suite.rows.size(),
                        profile.name.c_str());
            ordered_json files = ordered_json::array();
            for (const ManifestRow& r : suite.rows)
            {
                if (r.feasible)
                {
                    files.push_back(r.file.string());
                }
            }
            manifest.write(*generate, gen_out / "run.json",
                           { { "manifest", suite.manifest_path.string() }, { "models", files } }, gen_seed, "");
            if (suite.feasible_count == 0)
            {
                std::cerr << "error: no grid point satisfies profile " << profile.name << '\n';
                return kInfeasible;
            }
        }
        else if (bench->parsed())
        {
            if (bench_input != "random")
            {
                bench_cfg.input = BenchConfig::Input::Image;
                bench_cfg.image = bench_input;
            }
            bench_cfg.validate();
            const GroupBy group = parse_group_by(bench_group);
            const auto files    = model_files(bench_models);
            std::vector<BenchmarkResult> results;
            for (const fs::path& f : files)
            {
                results.push_back(run_benchmark(f, bench_cfg));
                const BenchmarkResult& r = results.back();
                std::fprintf(stderr, "%s p95=%.4fms fps=%.2f\n", r.model_id.c_str(), r.latency_p95_ms,
                             r.throughput_fps);
            }
            // Nothing is written until every model has been measured.
            write_report(results, bench_out, group);
            manifest.write(*bench, with_suffix(bench_out, ".run.json"),
                           { { "report", bench_out.string() }, { "samples", samples_path_for(bench_out).string() } },
                           bench_cfg.seed, bench_cfg.host_tag);
        }
        else if (train_cmd->parsed())
        {
            train_cfg.validate();
            const ModelSpec model = load_model(train_model);
            const Dataset ds = load_directory(train_data, model.input_shape().height(), train_ratio, train_cfg.seed);
            print_warnings(ds);
            const TrainResult r = train(model, ds, train_cfg);
            for (const EpochMetrics& e : r.history)
            {
                std::printf("epoch %d train_acc=%.6f train_loss=%.6f val_acc=%.6f val_loss=%.6f\n", e.epoch,
                            e.train.accuracy, e.train.loss, e.validation.accuracy, e.validation.loss);
            }
            if (train_history.empty())
            {
                train_history = with_suffix(train_out, ".history.csv");
            }
            save_model(r.model, train_out);
            write_history_csv(r.history, train_history);
            manifest.write(*train_cmd, with_suffix(train_out, ".run.json"),
                           { { "model", train_out.string() }, { "history", train_history.string() } },
                           train_cfg.seed, "");
        }
        else if (eval->parsed())
        {
            const ModelSpec model = load_model(eval_model);
            const Dataset ds      = load_directory(eval_data, model.input_shape().height(), eval_ratio, eval_seed);
            print_warnings(ds);
            Metrics m;
            if (eval_split == "all")
            {
                std::vector<const LabeledImage*> all;
                for (const LabeledImage& item : ds.items())
                {
                    all.push_back(&item);
                }
                m = evaluate(model, all);
            }
            else
            {
                m = evaluate(model, ds, parse_split(eval_split));
            }
            print_metrics(eval_split, m);
            if (!eval_out.empty())
            {
                std::ofstream out(eval_out);
                out << "model,split,accuracy,loss,correct,total\n"
                    << model.id() << ',' << eval_split << ',' << format_exact(m.accuracy) << ','
                    << format_exact(m.loss) << ',' << m.correct << ',' << m.total << '\n';
                if (!out)
                {
                    throw IoError("cannot write " + eval_out.string());
                }
                manifest.write(*eval, with_suffix(eval_out, ".run.json"), { { "metrics", eval_out.string() } },
                               eval_seed, "");
            }
        }
        else if (sal->parsed())
        {
            const ModelSpec model = load_model(sal_model);
            const int edge        = model.input_shape().height();
            const Tensor image    = load_normalized_image(sal_image, edge, model.input_shape().width());
            const SaliencyMap map = saliency(model, image, sal_class >= 0 ? std::optional<int>(sal_class) : std::nullopt);
            write_image(sal_out, saliency_image(map));
            std::printf("class %d%s\n", map.target_class, map.zero_gradient ? " (zero gradient)" : "");
            manifest.write(*sal, with_suffix(sal_out, ".run.json"), { { "map", sal_out.string() } }, 0, "");
        }
        else if (report->parsed())
        {
            const GroupBy group = parse_group_by(report_group);
            std::vector<ReportRow> rows;
            for (const fs::path& p : report_in)
            {
                auto part = read_report_csv(p);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            write_report_csv(rows, report_out, group);
            ordered_json outputs = { { "report", report_out.string() } };
            if (!report_svg.empty())
            {
                ordered_json charts = ordered_json::array();
                for (const fs::path& c : write_svg_charts(rows, report_svg, group))
                {
                    charts.push_back(c.string());
                }
                outputs["charts"] = charts;
            }
            std::printf("%-32s %-14s %12s %12s %10s %s\n", "model", "family", "params", "p95_ms", "fps", "host");
            for (const ReportRow& r : read_report_csv(report_out))
            {
                std::printf("%-32s %-14s %12s %12.4f %10.2f %s\n", r.model_id.c_str(), r.family.c_str(),
                            r.params ? std::to_string(*r.params).c_str() : "-", r.latency_p95_ms, r.throughput_fps,
                            r.host_tag.c_str());
            }
            manifest.write(*report, with_suffix(report_out, ".run.json"), outputs, 0, "");
        }
        else if (synth->parsed())
        {
            const Dataset ds = make_synthetic_brightness(synth_per_class, synth_edge, 0.8, synth_seed);
            write_dataset(ds, synth_out);
            std::printf("%zu images in %d classes\n", ds.items().size(), ds.class_count());
            manifest.write(*synth, synth_out / "run.json", { { "dataset", synth_out.string() } }, synth_seed, "");
        }
    }
    catch (const ParameterError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    }
    return kOk;
}
