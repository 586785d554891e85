// panda: command line front end for augmentation, dataset statistics,
// PQ evaluation and data-efficiency estimates.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "panda/efficiency.hpp"
#include "panda/error.hpp"
#include "panda/log.hpp"
#include "panda/pipeline.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw panda::IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw panda::IoError("short write: " + path);
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw panda::InvalidConfig(std::string("expected ") + what + " as a:b, got '" + text + "'");
    }
    try {
        std::size_t used_a = 0, used_b = 0;
        const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
        const double x = std::stod(a, &used_a);
        const double y = std::stod(b, &used_b);
        if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing characters");
        return {x, y};
    } catch (const std::logic_error&) {
        throw panda::InvalidConfig(std::string("cannot parse ") + what + " '" + text + "'");
    }
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct AugmentArgs {
    std::string input_json, images_dir, labels_dir, output_dir, summary_path;
    int copies = 1;
    std::uint64_t seed = 0;
    panda::AugmentConfig cfg;
    bool no_dropout = false, no_resize = false, no_shift = false;
    std::string shift_mode = "zoom";
    unsigned workers = default_workers();
    bool merge = false;
    bool lenient = false;
};

int run_augment(const AugmentArgs& a) {
    panda::JobSpec job;
    job.input = {a.input_json, a.images_dir, a.labels_dir};
    job.output_dir = a.output_dir;
    job.copies = a.copies;
    job.config = a.cfg;
    job.config.global_seed = a.seed;
    job.config.enable_dropout = !a.no_dropout;
    job.config.enable_resize = !a.no_resize;
    job.config.enable_shift = !a.no_shift;
    job.config.shift_mode = a.shift_mode == "random" ? panda::ShiftMode::uniform_random : panda::ShiftMode::zoom_coupled;
    job.workers = a.workers;
    job.merge_originals = a.merge;
    job.lenient = a.lenient;
    const auto summary = panda::run_augment(job);
    write_text(a.summary_path, panda::summary_json(summary, job));
    return 0;
}

struct StatsArgs {
    std::string input_json, images_dir, labels_dir, csv_path, json_path;
    unsigned workers = default_workers();
    bool lenient = false;
};

int run_stats(const StatsArgs& a) {
    const auto stats = panda::run_stats({a.input_json, a.images_dir, a.labels_dir}, a.workers, a.lenient);
    if (!a.csv_path.empty()) write_text(a.csv_path, panda::class_stats_csv(stats));
    if (!a.json_path.empty() || a.csv_path.empty()) write_text(a.json_path, panda::class_stats_json(stats));
    return 0;
}

struct EvaluateArgs {
    std::string gt_json, gt_labels, pred_json, pred_labels, out_path;
    unsigned workers = default_workers();
    bool include_fp_only = false;
};

int run_evaluate(const EvaluateArgs& a) {
    const auto report = panda::evaluate_dataset({a.gt_json, {}, a.gt_labels}, {a.pred_json, {}, a.pred_labels},
                                                a.workers, a.include_fp_only);
    write_text(a.out_path, panda::pq_report_json(report));
    return 0;
}

struct EfficiencyArgs {
    std::vector<std::string> points;
    std::string coef;
    std::vector<double> invert;
    std::vector<double> de;
    double synthetic_ratio = 1.0;
    std::string out_path;
};

int run_efficiency(const EfficiencyArgs& a) {
    if (a.points.empty() == a.coef.empty()) {
        throw panda::InvalidConfig("give either --points or --coef");
    }
    if (!a.de.empty() && a.synthetic_ratio != 1.0) {
        throw panda::InvalidConfig(
            "data efficiency is only defined when synthetic and original images are mixed 1:1 "
            "(got --synthetic-ratio " + std::to_string(a.synthetic_ratio) + ")");
    }

    ordered_json root;
    root["schema"] = "panda.efficiency/1";
    panda::RegressionFit fit;
    if (!a.points.empty()) {
        std::vector<panda::SizePoint> pts;
        for (const auto& p : a.points) {
            const auto [n, y] = parse_pair(p, "point n:y");
            pts.push_back({n, y});
        }
        fit = panda::fit_log_linear(pts);
        root["fit"] = {{"source", "points"}, {"points", pts.size()}};
    } else {
        const auto [slope, intercept] = parse_pair(a.coef, "coefficients slope:intercept");
        fit.slope = slope;
        fit.intercept = intercept;
        fit.r2 = std::nan("");
        root["fit"] = {{"source", "coefficients"}};
    }
    root["fit"]["slope"] = fit.slope;
    root["fit"]["intercept"] = fit.intercept;
    if (std::isnan(fit.r2)) {
        root["fit"]["r2"] = nullptr;
    } else {
        root["fit"]["r2"] = fit.r2;
    }

    if (!a.invert.empty()) {
        root["effective_n"] = ordered_json::array();
        for (double y : a.invert) root["effective_n"].push_back({{"y", y}, {"N", panda::effective_n(fit, y)}});
    }
    if (!a.de.empty()) {
        const double n_orig = panda::effective_n(fit, a.de[0]);
        const double n_aug = panda::effective_n(fit, a.de[1]);
        root["data_efficiency"] = {{"y_orig", a.de[0]},
                                   {"y_aug", a.de[1]},
                                   {"N_orig", n_orig},
                                   {"N_aug", n_aug},
                                   {"DE_percent", panda::data_efficiency(n_orig, n_aug)}};
    }
    write_text(a.out_path, root.dump(2) + "\n");
    return 0;
}

int report_error(const panda::Error& e) {
    ordered_json err;
    err["error"] = {{"kind", std::string(e.kind())}, {"message", e.what()}, {"exit_code", panda::exit_code_for(e)}};
    std::cerr << err.dump() << '\n';
    return panda::exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
    panda::log::configure_from_env();
    CLI::App app{"Panoptic data augmentation, dataset statistics and evaluation"};
    app.require_subcommand(1);

    AugmentArgs aug;
    auto* augment = app.add_subcommand("augment", "Synthesise augmented copies of a panoptic dataset");
    augment->add_option("--input-json", aug.input_json, "COCO panoptic annotation JSON")->required();
    augment->add_option("--images-dir", aug.images_dir, "Directory of RGB images")->required();
    augment->add_option("--labels-dir", aug.labels_dir, "Directory of ID-encoded label PNGs")->required();
    augment->add_option("--output-dir", aug.output_dir, "Output root (panoptic.json, images/, labels/)")->required();
    augment->add_option("--copies", aug.copies, "Synthetic copies per original")->capture_default_str()->check(CLI::PositiveNumber);
    augment->add_option("--seed", aug.seed, "Global seed")->capture_default_str();
    augment->add_option("--drop-low", aug.cfg.drop_low, "Area fraction below which segments are never dropped")->capture_default_str();
    augment->add_option("--drop-high", aug.cfg.drop_high, "Area fraction above which segments are always dropped")->capture_default_str();
    augment->add_option("--resize-min", aug.cfg.resize_min, "Smallest resize factor")->capture_default_str();
    augment->add_option("--resize-max", aug.cfg.resize_max, "Largest resize factor")->capture_default_str();
    augment->add_flag("--no-dropout", aug.no_dropout, "Disable dropout");
    augment->add_flag("--no-resize", aug.no_resize, "Disable resize");
    augment->add_flag("--no-shift", aug.no_shift, "Disable shift");
    augment->add_option("--shift-mode", aug.shift_mode, "zoom (coupled to resize) or random")
        ->check(CLI::IsMember({"zoom", "random"}))
        ->capture_default_str();
    augment->add_option("--workers", aug.workers, "Worker threads")->check(CLI::PositiveNumber);
    augment->add_flag("--merge-originals", aug.merge, "Also copy originals and list them in panoptic.json");
    augment->add_flag("--lenient", aug.lenient, "Drop inconsistent input segments instead of failing");
    augment->add_option("--summary", aug.summary_path, "Write the JSON summary here instead of stdout");

    StatsArgs st;
    auto* stats = app.add_subcommand("stats", "Per-class pixel statistics");
    stats->add_option("--input-json", st.input_json, "COCO panoptic annotation JSON")->required();
    stats->add_option("--labels-dir", st.labels_dir, "Directory of ID-encoded label PNGs")->required();
    stats->add_option("--images-dir", st.images_dir, "Accepted for symmetry; RGB is not read");
    stats->add_option("--csv", st.csv_path, "Write CSV here");
    stats->add_option("--json", st.json_path, "Write JSON here (default stdout when --csv is absent)");
    stats->add_option("--workers", st.workers, "Worker threads")->check(CLI::PositiveNumber);
    stats->add_flag("--lenient", st.lenient, "Drop inconsistent segments instead of failing");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Panoptic quality of predictions against ground truth");
    evaluate->add_option("--gt", ev.gt_json, "Ground-truth annotation JSON")->required();
    evaluate->add_option("--gt-labels", ev.gt_labels, "Ground-truth label PNG directory")->required();
    evaluate->add_option("--pred", ev.pred_json, "Prediction annotation JSON")->required();
    evaluate->add_option("--pred-labels", ev.pred_labels, "Prediction label PNG directory")->required();
    evaluate->add_option("--out", ev.out_path, "Report path (default stdout)");
    evaluate->add_option("--workers", ev.workers, "Worker threads")->check(CLI::PositiveNumber);
    evaluate->add_flag("--include-fp-only-classes", ev.include_fp_only,
                       "Average classes that only have false positives into the aggregates");

    EfficiencyArgs ef;
    auto* efficiency = app.add_subcommand("efficiency", "Log-linear fits, effective training-set sizes, data efficiency");
    efficiency->add_option("--points", ef.points, "Observations n:y");
    efficiency->add_option("--coef", ef.coef, "Use published coefficients slope:intercept instead of fitting");
    efficiency->add_option("--invert", ef.invert, "Metric values to convert to effective sizes");
    efficiency->add_option("--de", ef.de, "Metric without and with augmentation")->expected(2);
    efficiency->add_option("--synthetic-ratio", ef.synthetic_ratio, "Synthetic:original ratio of the augmented run")
        ->capture_default_str();
    efficiency->add_option("--out", ef.out_path, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*augment) return run_augment(aug);
        if (*stats) return run_stats(st);
        if (*evaluate) return run_evaluate(ev);
        if (*efficiency) return run_efficiency(ef);
    } catch (const panda::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = {{"kind", "InternalError"}, {"message", e.what()}, {"exit_code", 2}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
    return 1;
}
