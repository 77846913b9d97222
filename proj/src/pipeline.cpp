// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <thread>

#include "sitecheck/evalsuite.hpp"
#include "sitecheck/io.hpp"
#include "sitecheck/log.hpp"

namespace sitecheck {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

double round6(double v) {
    return std::round(v * 1e6) / 1e6;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

ordered_json snapshot_to_json(const ConfigSnapshot& s) {
    ordered_json providers = ordered_json::object();
    for (const auto& [capability, model] : s.provider_models) providers[capability] = model;
    ordered_json doc = {{"providers", providers},
                        {"match",
                         {{"time_window_min", s.match.time_window_min},
                          {"location_threshold", s.match.location_threshold}}},
                        {"retrieval",
                         {{"k", s.k}, {"mode", to_string(s.mode)}, {"query_text", s.query_text}}},
                        {"prompt_template_sha256", s.prompt_template_sha256}};
    if (s.index_fingerprint) {
        doc["index_fingerprint"] = *s.index_fingerprint;
    } else {
        doc["index_fingerprint"] = nullptr;
    }
    return doc;
}

ordered_json evidence_to_json(const std::vector<RankedPage>& evidence) {
    ordered_json arr = ordered_json::array();
    for (const RankedPage& page : evidence) {
        arr.push_back(
            {{"page_id", page.page_id}, {"score", round6(page.score)}, {"rank", page.rank}});
    }
    return arr;
}

}  // namespace

const std::string& default_prompt_template() {
    static const std::string text =
        "You are a construction safety inspector writing a formal inspection report.\n"
        "Use the observation below to describe the site, list every safety hazard,\n"
        "and give actionable recommendations. Where the evidence excerpts support a\n"
        "hazard or recommendation, cite the regulation page as \"page N\". If no\n"
        "evidence is provided, state \"Regulatory support: None.\"\n"
        "\n"
        "[Observation]\n"
        "{{observation}}\n"
        "\n"
        "[Evidence]\n"
        "{{evidence}}\n";
    return text;
}

SiteObservation assemble_observation(const std::string& image_id, const std::string& caption,
                                     const std::optional<std::string>& audio_id,
                                     const std::optional<std::string>& transcript) {
    SiteObservation obs;
    obs.image_id = image_id;
    obs.audio_id = audio_id;
    obs.caption = caption;
    obs.transcript = transcript;

    obs.header = parse_annotation_lenient(caption);
    if (transcript) {
        const LenientHeader audio_header = parse_annotation_lenient(*transcript);
        if (!obs.header.timestamp_min) obs.header.timestamp_min = audio_header.timestamp_min;
        if (!obs.header.location_text) obs.header.location_text = audio_header.location_text;
    }

    std::string fused;
    if (obs.header.timestamp_min) {
        fused += "Time: " + format_timestamp_iso(*obs.header.timestamp_min) + "\n";
    }
    if (obs.header.location_text) {
        fused += "Location: " + *obs.header.location_text + "\n";
    }
    if (!fused.empty()) fused += "\n";
    fused += "[Image description]\n" + caption + "\n";
    if (transcript) {
        fused += "\n[Audio transcript]\n" + *transcript + "\n";
    }
    obs.fused_text = std::move(fused);
    return obs;
}

SiteObservation observe(const std::string& image_id, std::span<const std::uint8_t> image,
                        const std::optional<std::pair<std::string, std::vector<std::uint8_t>>>&
                            matched_audio,
                        Providers& providers) {
    const auto tag = [&](const std::string& msg) { return image_id + ": " + msg; };
    try {
        const std::string caption = providers.captioner->caption_image(image);
        std::optional<std::string> audio_id;
        std::optional<std::string> transcript;
        if (matched_audio) {
            audio_id = matched_audio->first;
            transcript = providers.transcriber->transcribe_audio(matched_audio->second);
        }
        return assemble_observation(image_id, caption, audio_id, transcript);
    } catch (const DecodeError& e) {
        throw DecodeError(tag(e.what()));
    } catch (const ProviderError& e) {
        throw ProviderError(tag(e.what()), e.status, e.attempts);
    } catch (const TimeoutError& e) {
        throw TimeoutError(tag(e.what()), e.attempts);
    }
}

std::vector<RankedPage> retrieve_evidence(const SiteObservation& obs, const PatchIndex& index,
                                          int k, TextEmbedder& embedder,
                                          const std::string& query_text) {
    const std::string& query = query_text == "caption" ? obs.caption : obs.fused_text;
    return search(index, query, k, embedder);
}

std::string render_prompt(const std::string& template_text, const SiteObservation& obs,
                          const std::vector<RankedPage>& evidence) {
    std::string evidence_block;
    if (evidence.empty()) {
        evidence_block = "(none)";
    } else {
        for (std::size_t i = 0; i < evidence.size(); ++i) {
            if (i > 0) evidence_block += "\n";
            evidence_block += "[page " + evidence[i].page_id + "]";
        }
    }
    std::string out = template_text;
    const auto replace_all = [&](const std::string& tag, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = out.find(tag, pos)) != std::string::npos) {
            out.replace(pos, tag.size(), value);
            pos += value.size();
        }
    };
    replace_all("{{observation}}", obs.fused_text);
    replace_all("{{evidence}}", evidence_block);
    return out;
}

SafetyReport generate_inspection_report(const SiteObservation& obs,
                                        const std::vector<RankedPage>& evidence,
                                        ReportGenerator& generator,
                                        const std::string& prompt_template,
                                        const ConfigSnapshot& snapshot) {
    GenerationPrompt prompt;
    prompt.observation_text = obs.fused_text;
    if (obs.header.timestamp_min) {
        prompt.time_text = format_timestamp_iso(*obs.header.timestamp_min);
    }
    prompt.location_text = obs.header.location_text;
    const LenientHeader caption_header = parse_annotation_lenient(obs.caption);
    prompt.scene_text = caption_header.body.empty() ? obs.caption : caption_header.body;
    if (obs.transcript) {
        const LenientHeader transcript_header = parse_annotation_lenient(*obs.transcript);
        prompt.hazards_text =
            transcript_header.body.empty() ? *obs.transcript : transcript_header.body;
    }
    for (const RankedPage& page : evidence) {
        prompt.evidence.push_back(EvidenceExcerpt{page.page_id, page.page_id});
    }
    prompt.rendered = render_prompt(prompt_template, obs, evidence);

    SafetyReport report;
    report.image_id = obs.image_id;
    report.audio_id = obs.audio_id;
    report.header = obs.header;
    report.evidence = evidence;
    report.config_snapshot = snapshot;
    try {
        report.report_text = generator.generate_report(prompt);
    } catch (const Error& e) {
        throw GenerationError(obs.image_id + ": report generation failed: " + e.what());
    }
    if (report.report_text.empty()) {
        throw GenerationError(obs.image_id + ": generator returned empty report");
    }
    report.citations = extract_citations(report.report_text);
    return report;
}

std::string report_to_json(const SafetyReport& report) {
    ordered_json doc;
    doc["image_id"] = report.image_id;
    doc["audio_id"] = report.audio_id ? ordered_json(*report.audio_id) : ordered_json(nullptr);
    doc["header"] = {{"time", report.header.timestamp_min
                                  ? ordered_json(format_timestamp_iso(*report.header.timestamp_min))
                                  : ordered_json(nullptr)},
                     {"location", report.header.location_text
                                      ? ordered_json(*report.header.location_text)
                                      : ordered_json(nullptr)}};
    doc["report_text"] = report.report_text;
    doc["citations"] = report.citations;  // std::set serializes sorted
    doc["evidence"] = evidence_to_json(report.evidence);
    doc["config_snapshot"] = snapshot_to_json(report.config_snapshot);
    return doc.dump(2) + "\n";
}

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallelism)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    }
    for (std::thread& t : threads) t.join();
}

namespace {

struct ImageState {
    std::string id;
    fs::path path;
    std::string caption;
    std::string error;
    LenientHeader header;
    std::optional<std::size_t> matched_audio;  // index into audio states
    double duration_ms = 0.0;
};

struct AudioState {
    std::string id;
    fs::path path;
    std::string transcript;
    std::string error;
    LenientHeader header;
};

}  // namespace

BatchOutcome run_batch(const RunConfig& cfg, Providers& providers) {
    cfg.validate();
    if (cfg.paths.images.empty()) throw ConfigError("paths.images is required");
    if (cfg.paths.output.empty()) throw ConfigError("paths.output is required");
    const bool with_audio = cfg.retrieval.mode == RunMode::kImageAudio;
    const bool with_rag = cfg.retrieval.mode != RunMode::kNoRag;
    if (with_audio && cfg.paths.audio.empty()) {
        throw ConfigError("paths.audio is required in image-audio mode");
    }
    if (with_rag && cfg.paths.index.empty()) {
        throw ConfigError("paths.index is required unless mode is no-rag");
    }

    const auto batch_start = std::chrono::steady_clock::now();

    std::optional<PatchIndex> index;
    if (with_rag) index = load_index(cfg.paths.index);  // fatal on failure

    const std::string prompt_template =
        cfg.prompt_template ? read_text_file(*cfg.prompt_template) : default_prompt_template();

    ConfigSnapshot snapshot;
    for (const char* capability : {"caption", "transcribe", "embed_text", "embed_page", "generate"}) {
        snapshot.provider_models[capability] = cfg.provider(capability).model_id();
    }
    snapshot.match = cfg.match;
    snapshot.k = cfg.retrieval.k;
    snapshot.mode = cfg.retrieval.mode;
    snapshot.query_text = cfg.retrieval.query_text;
    snapshot.prompt_template_sha256 = sha256_hex(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(prompt_template.data()), prompt_template.size()));
    if (index) snapshot.index_fingerprint = index->fingerprint_hex();

    fs::create_directories(cfg.paths.output);

    std::vector<ImageState> images;
    std::set<std::string> seen_ids;
    for (const fs::path& p : list_files(cfg.paths.images, {".png", ".jpg", ".jpeg"})) {
        if (!seen_ids.insert(p.stem().string()).second) {
            throw ConfigError("duplicate image id (same stem, different extension): " +
                              p.stem().string());
        }
        images.push_back(ImageState{p.stem().string(), p, {}, {}, {}, std::nullopt, 0.0});
    }
    std::vector<AudioState> audio;
    if (with_audio) {
        seen_ids.clear();
        for (const fs::path& p : list_files(cfg.paths.audio, {".wav", ".mp3"})) {
            if (!seen_ids.insert(p.stem().string()).second) {
                throw ConfigError("duplicate audio id (same stem, different extension): " +
                                  p.stem().string());
            }
            audio.push_back(AudioState{p.stem().string(), p, {}, {}, {}});
        }
    }

    // Stage 1: captions and transcripts (header extraction included).
    parallel_for(images.size(), cfg.parallelism, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto bytes = read_file(images[i].path);
            images[i].caption = providers.captioner->caption_image(bytes);
            images[i].header = parse_annotation_lenient(images[i].caption);
            log_event("caption", images[i].id, "ok", ms_since(t0));
        } catch (const Error& e) {
            images[i].error = e.what();
            log_event("caption", images[i].id, "failed", ms_since(t0), e.what());
        }
        images[i].duration_ms = ms_since(t0);
    });
    parallel_for(audio.size(), cfg.parallelism, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto bytes = read_file(audio[i].path);
            audio[i].transcript = providers.transcriber->transcribe_audio(bytes);
            audio[i].header = parse_annotation_lenient(audio[i].transcript);
            log_event("transcribe", audio[i].id, "ok", ms_since(t0));
        } catch (const Error& e) {
            audio[i].error = e.what();
            log_event("transcribe", audio[i].id, "failed", ms_since(t0), e.what());
        }
    });

    BatchOutcome outcome;
    outcome.snapshot = snapshot;

    // Stage 2: pairing (image-audio mode only).
    if (with_audio) {
        std::vector<MatchInput> image_inputs;
        std::vector<std::size_t> image_lookup;
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (!images[i].error.empty()) continue;
            image_inputs.push_back(MatchInput{images[i].id, images[i].header.timestamp_min,
                                              images[i].header.location_text.value_or("")});
            image_lookup.push_back(i);
        }
        std::vector<MatchInput> audio_inputs;
        std::vector<std::size_t> audio_lookup;
        std::map<std::string, std::size_t> audio_by_id;
        for (std::size_t a = 0; a < audio.size(); ++a) {
            if (!audio[a].error.empty()) {
                outcome.audio_failures.push_back(AudioFailure{audio[a].id, audio[a].error});
                continue;
            }
            audio_inputs.push_back(MatchInput{audio[a].id, audio[a].header.timestamp_min,
                                              audio[a].header.location_text.value_or("")});
            audio_lookup.push_back(a);
            audio_by_id.emplace(audio[a].id, a);
        }
        outcome.matches = match_pairs(image_inputs, audio_inputs, cfg.match,
                                      *providers.text_embedder);
        std::map<std::string, std::size_t> image_by_id;
        for (std::size_t i = 0; i < images.size(); ++i) image_by_id.emplace(images[i].id, i);
        for (const MatchPair& pair : outcome.matches.pairs) {
            images[image_by_id.at(pair.image_id)].matched_audio = audio_by_id.at(pair.audio_id);
        }
        log_event("match", "batch", "ok", ms_since(batch_start),
                  std::to_string(outcome.matches.pairs.size()) + "-pairs");
    } else {
        outcome.matches.config = cfg.match;
    }

    // Stage 3: retrieve + generate + write, one report per image.
    std::vector<BatchItem> items(images.size());
    parallel_for(images.size(), cfg.parallelism, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        BatchItem& item = items[i];
        item.image_id = images[i].id;
        if (!images[i].error.empty()) {
            item.status = "failed";
            item.error = images[i].error;
            item.duration_ms = images[i].duration_ms;
            return;
        }
        try {
            std::optional<std::string> audio_id;
            std::optional<std::string> transcript;
            if (images[i].matched_audio) {
                const AudioState& a = audio[*images[i].matched_audio];
                audio_id = a.id;
                transcript = a.transcript;
            }
            const SiteObservation obs =
                assemble_observation(images[i].id, images[i].caption, audio_id, transcript);

            std::vector<RankedPage> evidence;
            if (with_rag) {
                evidence = retrieve_evidence(obs, *index, cfg.retrieval.k,
                                             *providers.text_embedder, cfg.retrieval.query_text);
            }
            const SafetyReport report = generate_inspection_report(
                obs, evidence, *providers.generator, prompt_template, snapshot);

            item.audio_id = audio_id;
            item.report_txt = images[i].id + ".report.txt";
            item.report_json = images[i].id + ".report.json";
            write_file_atomic(cfg.paths.output / item.report_txt, report.report_text);
            write_file_atomic(cfg.paths.output / item.report_json, report_to_json(report));
            item.status = "ok";
            log_event("report", images[i].id, "ok", ms_since(t0));
        } catch (const Error& e) {
            item.status = "failed";
            item.error = e.what();
            item.report_txt.clear();
            item.report_json.clear();
            log_event("report", images[i].id, "failed", ms_since(t0), e.what());
        }
        item.duration_ms = images[i].duration_ms + ms_since(t0);
    });

    outcome.items = std::move(items);
    for (const BatchItem& item : outcome.items) {
        if (item.status == "ok") {
            ++outcome.ok_count;
        } else {
            ++outcome.failed_count;
        }
    }
    outcome.total_ms = ms_since(batch_start);
    return outcome;
}

std::string manifest_to_json(const BatchOutcome& outcome, const std::string& started_at,
                             const std::string& finished_at) {
    ordered_json per_item_ms = ordered_json::object();
    for (const BatchItem& item : outcome.items) {
        per_item_ms[item.image_id] = std::round(item.duration_ms * 10.0) / 10.0;
    }
    ordered_json items = ordered_json::array();
    for (const BatchItem& item : outcome.items) {
        items.push_back(
            {{"image_id", item.image_id},
             {"audio_id", item.audio_id ? ordered_json(*item.audio_id) : ordered_json(nullptr)},
             {"status", item.status},
             {"report_json", item.report_json.empty() ? ordered_json(nullptr)
                                                      : ordered_json(item.report_json)},
             {"report_txt", item.report_txt.empty() ? ordered_json(nullptr)
                                                    : ordered_json(item.report_txt)},
             {"error", item.error.empty() ? ordered_json(nullptr) : ordered_json(item.error)}});
    }
    ordered_json audio_failures = ordered_json::array();
    for (const AudioFailure& f : outcome.audio_failures) {
        audio_failures.push_back({{"id", f.id}, {"error", f.error}});
    }

    // Everything that varies between reruns lives under "timestamp".
    ordered_json doc;
    doc["timestamp"] = {{"started_at", started_at},
                        {"finished_at", finished_at},
                        {"total_ms", std::round(outcome.total_ms * 10.0) / 10.0},
                        {"per_item_ms", per_item_ms}};
    doc["config_snapshot"] = snapshot_to_json(outcome.snapshot);
    doc["counts"] = {{"images", outcome.items.size()},
                     {"reports", outcome.ok_count},
                     {"failures", outcome.failed_count}};
    doc["items"] = items;
    doc["matches"] = nlohmann::ordered_json::parse(match_result_to_json(outcome.matches));
    doc["audio_failures"] = audio_failures;
    return doc.dump(2) + "\n";
}

}  // namespace sitecheck
