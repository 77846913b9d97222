// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/cli.hpp"

#include <chrono>
#include <ctime>
#include <json.hpp>
#include <set>

#include "sitecheck/index.hpp"
#include "sitecheck/io.hpp"
#include "sitecheck/log.hpp"
#include "sitecheck/pipeline.hpp"

namespace sitecheck {

namespace fs = std::filesystem;

namespace {

std::string utc_now_iso() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int cmd_index(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& out_path,
              std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        if (corpus_dir.empty() || out_path.empty()) {
            throw ConfigError("index requires a corpus directory and an output path");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const auto files = list_files(corpus_dir, {".png", ".jpg", ".jpeg"});
        if (files.empty()) {
            err << "no pages found in " << corpus_dir.string() << "\n";
            return kExitFatal;
        }
        std::vector<std::pair<std::string, std::vector<std::uint8_t>>> pages;
        pages.reserve(files.size());
        for (const fs::path& f : files) {
            pages.emplace_back(f.stem().string(), read_file(f));
        }
        Providers providers = make_providers(cfg);
        const PatchIndex index = build_index(pages, *providers.page_embedder);
        save_index(index, out_path);

        const auto bytes = fs::file_size(out_path);
        out << "indexed " << index.page_count() << " pages, " << index.total_patches()
            << " patches, " << bytes << " bytes -> " << out_path.string() << "\n";
        out << "fingerprint " << index.fingerprint_hex() << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DuplicatePageError& e) {
        err << "corpus error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}

int cmd_match(const RunConfig& cfg, const fs::path& images_dir, const fs::path& audio_dir,
              const fs::path& out_path, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        if (images_dir.empty() || audio_dir.empty() || out_path.empty()) {
            throw ConfigError("match requires images dir, audio dir and an output path");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        Providers providers = make_providers(cfg);
        const auto image_files = list_files(images_dir, {".png", ".jpg", ".jpeg"});
        const auto audio_files = list_files(audio_dir, {".wav", ".mp3"});

        std::vector<MatchInput> images, audio;
        std::vector<UnmatchedItem> image_failures, audio_failures;
        std::size_t failures = 0;
        std::set<std::string> seen;
        for (const fs::path& f : image_files) {
            const std::string id = f.stem().string();
            if (!seen.insert(id).second) {
                throw ConfigError("duplicate image id: " + id);
            }
            try {
                const auto caption = providers.captioner->caption_image(read_file(f));
                const LenientHeader header = parse_annotation_lenient(caption);
                images.push_back(
                    MatchInput{id, header.timestamp_min, header.location_text.value_or("")});
            } catch (const Error& e) {
                image_failures.push_back(UnmatchedItem{id, std::string("caption-failed")});
                log_event("caption", id, "failed", 0.0, e.what());
                ++failures;
            }
        }
        seen.clear();
        for (const fs::path& f : audio_files) {
            const std::string id = f.stem().string();
            if (!seen.insert(id).second) {
                throw ConfigError("duplicate audio id: " + id);
            }
            try {
                const auto transcript = providers.transcriber->transcribe_audio(read_file(f));
                const LenientHeader header = parse_annotation_lenient(transcript);
                audio.push_back(
                    MatchInput{id, header.timestamp_min, header.location_text.value_or("")});
            } catch (const Error& e) {
                audio_failures.push_back(UnmatchedItem{id, std::string("transcription-failed")});
                log_event("transcribe", id, "failed", 0.0, e.what());
                ++failures;
            }
        }

        MatchResult result = match_pairs(images, audio, cfg.match, *providers.text_embedder);
        result.unmatched_images.insert(result.unmatched_images.end(), image_failures.begin(),
                                       image_failures.end());
        result.unmatched_audio.insert(result.unmatched_audio.end(), audio_failures.begin(),
                                      audio_failures.end());

        write_file_atomic(out_path, match_result_to_json(result));
        out << "matched " << result.pairs.size() << " pairs; " << result.unmatched_images.size()
            << " images and " << result.unmatched_audio.size() << " audio notes unmatched -> "
            << out_path.string() << "\n";
        return failures > 0 ? kExitPartial : kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}

int cmd_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        if (cfg.paths.images.empty() || cfg.paths.output.empty()) {
            throw ConfigError("inspect requires paths.images and paths.output");
        }
        if (cfg.retrieval.mode == RunMode::kImageAudio && cfg.paths.audio.empty()) {
            throw ConfigError("paths.audio is required in image-audio mode");
        }
        if (cfg.retrieval.mode != RunMode::kNoRag && cfg.paths.index.empty()) {
            throw ConfigError("paths.index is required unless mode is no-rag");
        }
        // Fail fast on unreadable inputs before any provider call.
        if (!fs::is_directory(cfg.paths.images)) {
            throw ConfigError("paths.images is not a directory: " + cfg.paths.images.string());
        }
        if (cfg.retrieval.mode == RunMode::kImageAudio && !fs::is_directory(cfg.paths.audio)) {
            throw ConfigError("paths.audio is not a directory: " + cfg.paths.audio.string());
        }
        if (cfg.retrieval.mode != RunMode::kNoRag && !fs::is_regular_file(cfg.paths.index)) {
            throw ConfigError("paths.index does not exist: " + cfg.paths.index.string());
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const std::string started_at = utc_now_iso();
        Providers providers = make_providers(cfg);
        const BatchOutcome outcome = run_batch(cfg, providers);
        write_file_atomic(cfg.paths.output / "manifest.json",
                          manifest_to_json(outcome, started_at, utc_now_iso()));
        out << "inspected " << outcome.items.size() << " images: " << outcome.ok_count
            << " reports, " << outcome.failed_count << " failures -> "
            << cfg.paths.output.string() << "\n";
        return outcome.failed_count == 0 ? kExitOk : kExitPartial;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "fatal: " << e.what() << "\n";
        return kExitFatal;
    }
}

int cmd_eval(const fs::path& reports_dir, const fs::path& gt_path, Averaging averaging,
             const fs::path& out_path, std::ostream& out, std::ostream& err) {
    try {
        const GroundTruth gt = load_ground_truth(gt_path);

        std::map<std::string, std::set<std::string>> preds;
        std::vector<std::string> missing;
        for (const auto& [report_id, refs] : gt.per_report) {
            const fs::path txt = reports_dir / (report_id + ".report.txt");
            const fs::path json_path = reports_dir / (report_id + ".report.json");
            std::string report_text;
            if (fs::is_regular_file(txt)) {
                report_text = read_text_file(txt);
            } else if (fs::is_regular_file(json_path)) {
                const auto doc = nlohmann::json::parse(read_text_file(json_path));
                report_text = doc.value("report_text", std::string{});
            } else {
                missing.push_back(report_id);
                continue;
            }
            std::set<std::string> refs_out;
            for (int n : extract_citations(report_text)) refs_out.insert(std::to_string(n));
            preds.emplace(report_id, std::move(refs_out));
        }
        if (!missing.empty()) {
            std::string msg = "no report file for ground-truth ids:";
            for (const auto& id : missing) msg += " " + id;
            throw KeyMismatchError(msg, missing, {});
        }

        const ComplianceMetrics metrics = compute_metrics(gt, preds, averaging);
        if (!out_path.empty()) write_file_atomic(out_path, metrics_to_json(metrics));

        char line[160];
        std::snprintf(line, sizeof(line),
                      "averaging=%s n_reports=%zu universe=%zu\n"
                      "hamming_loss %.4f\nprecision    %.4f\nrecall       %.4f\nf1           %.4f\n",
                      to_string(metrics.averaging).c_str(), metrics.n_reports,
                      metrics.universe_size, metrics.hamming_loss, metrics.precision,
                      metrics.recall, metrics.f1);
        out << line;
        return kExitOk;
    } catch (const KeyMismatchError& e) {
        err << "report id mismatch: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "error: unparsable report JSON: " << e.what() << "\n";
        return kExitFatal;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}

int cmd_compare(const fs::path& metrics_a, const fs::path& metrics_b, bool also_json,
                std::ostream& out, std::ostream& err) {
    try {
        const ComplianceMetrics a = load_metrics(metrics_a);
        const ComplianceMetrics b = load_metrics(metrics_b);
        const DeltaTable table = compare_runs(a, b);
        out << render_delta_table(table);
        if (also_json) out << delta_table_to_json(table);
        return kExitOk;
    } catch (const ModeMismatchError& e) {
        err << "mode mismatch: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}

}  // namespace sitecheck
