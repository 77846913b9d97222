// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>

#include "sitecheck/cli.hpp"
#include "sitecheck/log.hpp"

namespace {

// CLI flags override config keys one-for-one; empty string means "not set".
struct Overrides {
    std::string images, audio, corpus, index, output;
    std::string mode, query_text;
    int k = -1;
    int parallelism = -1;
    double time_window = -1.0;
    double location_threshold = -2.0;
};

void apply_overrides(sitecheck::RunConfig& cfg, const Overrides& ov) {
    if (!ov.images.empty()) cfg.paths.images = ov.images;
    if (!ov.audio.empty()) cfg.paths.audio = ov.audio;
    if (!ov.corpus.empty()) cfg.paths.corpus = ov.corpus;
    if (!ov.index.empty()) cfg.paths.index = ov.index;
    if (!ov.output.empty()) cfg.paths.output = ov.output;
    if (!ov.mode.empty()) cfg.retrieval.mode = sitecheck::run_mode_from_string(ov.mode);
    if (!ov.query_text.empty()) cfg.retrieval.query_text = ov.query_text;
    if (ov.k >= 0) cfg.retrieval.k = ov.k;
    if (ov.parallelism >= 0) cfg.parallelism = ov.parallelism;
    if (ov.time_window >= 0.0) cfg.match.time_window_min = ov.time_window;
    if (ov.location_threshold >= -1.0) cfg.match.location_threshold = ov.location_threshold;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sitecheck — batch construction-safety inspection reports with "
                 "regulation-page retrieval"};
    app.require_subcommand(1);

    std::string config_path;
    bool verbose = false;
    app.add_option("--config", config_path, "Run configuration JSON file");
    app.add_flag("--verbose", verbose, "Structured per-stage log lines on stderr");

    Overrides ov;

    auto* index_cmd = app.add_subcommand("index", "Build the regulation-page index");
    index_cmd->add_option("--corpus", ov.corpus, "Directory of <page_id>.png/jpg images");
    index_cmd->add_option("--out", ov.index, "Index file to write");

    auto* match_cmd = app.add_subcommand("match", "Pair images with audio notes");
    match_cmd->add_option("--images", ov.images, "Directory of inspection images");
    match_cmd->add_option("--audio", ov.audio, "Directory of audio notes");
    std::string matches_out = "matches.json";
    match_cmd->add_option("--out", matches_out, "matches.json output path");
    match_cmd->add_option("--time-window", ov.time_window, "Time window in minutes");
    match_cmd->add_option("--location-threshold", ov.location_threshold,
                          "Location similarity threshold");

    auto* inspect_cmd = app.add_subcommand("inspect", "Generate reports for a whole batch");
    inspect_cmd->add_option("--images", ov.images, "Directory of inspection images");
    inspect_cmd->add_option("--audio", ov.audio, "Directory of audio notes");
    inspect_cmd->add_option("--index", ov.index, "Index file (unless --mode no-rag)");
    inspect_cmd->add_option("--output", ov.output, "Output directory for reports + manifest");
    inspect_cmd->add_option("--mode", ov.mode, "no-rag | image | image-audio");
    inspect_cmd->add_option("--query-text", ov.query_text, "fused | caption");
    inspect_cmd->add_option("-k,--k", ov.k, "Evidence pages per report");
    inspect_cmd->add_option("--parallelism", ov.parallelism, "Concurrent items");

    auto* eval_cmd = app.add_subcommand("eval", "Score reports against ground truth");
    std::string reports_dir, gt_path, metrics_out, averaging = "sample";
    eval_cmd->add_option("--reports", reports_dir, "Directory of generated reports")->required();
    eval_cmd->add_option("--gt", gt_path, "Ground truth JSON")->required();
    eval_cmd->add_option("--averaging", averaging, "sample | micro");
    eval_cmd->add_option("--out", metrics_out, "metrics.json output path");

    auto* compare_cmd = app.add_subcommand("compare", "Delta table between two metric files");
    std::string metrics_a, metrics_b;
    bool compare_json = false;
    compare_cmd->add_option("metrics_a", metrics_a, "Baseline metrics.json")->required();
    compare_cmd->add_option("metrics_b", metrics_b, "Candidate metrics.json")->required();
    compare_cmd->add_flag("--json", compare_json, "Also print the JSON rendering");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? sitecheck::kExitOk : sitecheck::kExitConfig;
    }

    sitecheck::set_log_level(verbose ? sitecheck::LogLevel::kInfo : sitecheck::LogLevel::kQuiet);

    sitecheck::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = sitecheck::load_run_config(config_path);
        apply_overrides(cfg, ov);
    } catch (const sitecheck::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return sitecheck::kExitConfig;
    }

    if (index_cmd->parsed()) {
        return sitecheck::cmd_index(cfg, cfg.paths.corpus, cfg.paths.index, std::cout, std::cerr);
    }
    if (match_cmd->parsed()) {
        return sitecheck::cmd_match(cfg, cfg.paths.images, cfg.paths.audio, matches_out, std::cout,
                                    std::cerr);
    }
    if (inspect_cmd->parsed()) {
        return sitecheck::cmd_inspect(cfg, std::cout, std::cerr);
    }
    if (eval_cmd->parsed()) {
        sitecheck::Averaging mode;
        try {
            mode = sitecheck::averaging_from_string(averaging);
        } catch (const sitecheck::Error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return sitecheck::kExitConfig;
        }
        return sitecheck::cmd_eval(reports_dir, gt_path, mode, metrics_out, std::cout, std::cerr);
    }
    if (compare_cmd->parsed()) {
        return sitecheck::cmd_compare(metrics_a, metrics_b, compare_json, std::cout, std::cerr);
    }
    return sitecheck::kExitConfig;
}
