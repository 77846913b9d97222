// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sitecheck/config.hpp"
#include "sitecheck/index.hpp"
#include "sitecheck/matcher.hpp"
#include "sitecheck/providers.hpp"

namespace sitecheck {

/// One inspection unit: an image caption fused with its matched audio
/// transcript and whatever Time/Location header could be extracted.
struct SiteObservation {
    std::string image_id;
    std::optional<std::string> audio_id;
    LenientHeader header;
    std::string caption;
    std::optional<std::string> transcript;
    std::string fused_text;  // retrieval query; contains caption and transcript
};

/// Builds the observation from already-obtained provider outputs. The header
/// is taken from the caption, with missing fields filled from the transcript.
SiteObservation assemble_observation(const std::string& image_id, const std::string& caption,
                                     const std::optional<std::string>& audio_id,
                                     const std::optional<std::string>& transcript);

/// Captions the image (and transcribes the audio when present) through the
/// providers, then assembles the observation. Provider failures are rethrown
/// tagged with the image id.
SiteObservation observe(const std::string& image_id, std::span<const std::uint8_t> image,
                        const std::optional<std::pair<std::string, std::vector<std::uint8_t>>>&
                            matched_audio,
                        Providers& providers);

/// Top-k evidence pages for an observation. `query_text` selects between the
/// fused observation text (default) and the caption alone.
std::vector<RankedPage> retrieve_evidence(const SiteObservation& obs, const PatchIndex& index,
                                          int k, TextEmbedder& embedder,
                                          const std::string& query_text = "fused");

/// Everything needed to reproduce a single report: provider model ids,
/// thresholds, retrieval settings, the prompt template (by hash) and the
/// index fingerprint.
struct ConfigSnapshot {
    std::map<std::string, std::string> provider_models;  // capability -> model id
    MatchConfig match;
    int k = 5;
    RunMode mode = RunMode::kImageAudio;
    std::string query_text = "fused";
    std::string prompt_template_sha256;
    std::optional<std::string> index_fingerprint;
};

/// The default prompt template shipped with the repo (assets/ carries the
/// same text as a standalone file).
const std::string& default_prompt_template();

/// Fills {{observation}} and {{evidence}} placeholders.
std::string render_prompt(const std::string& template_text, const SiteObservation& obs,
                          const std::vector<RankedPage>& evidence);

struct SafetyReport {
    std::string image_id;
    std::optional<std::string> audio_id;
    LenientHeader header;
    std::string report_text;
    std::set<int> citations;  // extracted from report_text
    std::vector<RankedPage> evidence;
    ConfigSnapshot config_snapshot;
};

/// Renders the prompt, calls the generator and extracts citations.
/// Wraps provider failures in GenerationError.
SafetyReport generate_inspection_report(const SiteObservation& obs,
                                        const std::vector<RankedPage>& evidence,
                                        ReportGenerator& generator,
                                        const std::string& prompt_template,
                                        const ConfigSnapshot& snapshot);

/// report.json rendering (fixed schema; evidence scores carry 6 decimals).
std::string report_to_json(const SafetyReport& report);

struct BatchItem {
    std::string image_id;
    std::optional<std::string> audio_id;
    std::string status;  // "ok" or "failed"
    std::string error;
    std::string report_json;  // file names inside the output dir
    std::string report_txt;
    double duration_ms = 0.0;
};

struct AudioFailure {
    std::string id;
    std::string error;
};

struct BatchOutcome {
    MatchResult matches;
    std::vector<BatchItem> items;  // ordered by image_id
    std::vector<AudioFailure> audio_failures;
    std::size_t ok_count = 0;
    std::size_t failed_count = 0;
    double total_ms = 0.0;
    ConfigSnapshot snapshot;
};

/// Runs the whole batch: caption/transcribe, match, retrieve, generate, and
/// write one <image_id>.report.{txt,json} pair per image plus manifest.json
/// under cfg.paths.output. Per-item failures never abort the batch. The
/// index is required unless mode is no-rag. Throws ConfigError / IoError /
/// FormatError for fatal setup problems.
BatchOutcome run_batch(const RunConfig& cfg, Providers& providers);

/// manifest.json rendering. All volatile data (wall-clock times, durations)
/// lives under the single "timestamp" field so reruns are byte-identical
/// outside it.
std::string manifest_to_json(const BatchOutcome& outcome, const std::string& started_at,
                             const std::string& finished_at);

/// Bounded-parallelism helper: runs fn(0..n-1) on up to `parallelism`
/// threads. fn must handle its own exceptions.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace sitecheck
