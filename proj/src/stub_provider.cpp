// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "sitecheck/hashing.hpp"
#include "sitecheck/providers.hpp"
#include "sitecheck/raster.hpp"
#include "sitecheck/wav.hpp"

namespace sitecheck {

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            current.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));

    if (!stopwords.empty()) {
        std::erase_if(tokens, [this](const std::string& t) {
            return std::find(stopwords.begin(), stopwords.end(), t) != stopwords.end();
        });
    }
    return tokens;
}

StubProvider::StubProvider(Tokenizer tokenizer) : tokenizer_(std::move(tokenizer)) {}

Embedding StubProvider::token_vector(std::string_view token) {
    SplitMix64 gen(fnv1a64(token));
    Embedding e;
    e.values.resize(kPatchDim);
    for (double& v : e.values) v = gen.next_signed_unit();
    return normalize_l2(e);
}

namespace {

Embedding cell_vector(std::span<const std::uint8_t> cell_bytes) {
    SplitMix64 gen(fnv1a64(cell_bytes));
    Embedding e;
    e.values.resize(kPatchDim);
    for (double& v : e.values) v = gen.next_signed_unit();
    return normalize_l2(e);
}

}  // namespace

std::string StubProvider::caption_image(std::span<const std::uint8_t> image) {
    const RasterImage img = decode_image(image);

    // Fixture images carry their annotation in a "caption" text chunk.
    if (std::string caption = img.text_chunk("caption"); !caption.empty()) {
        return caption;
    }

    std::uint64_t sum = 0;
    for (std::uint8_t b : img.rgb) sum += b;
    const double mean = img.rgb.empty() ? 0.0 : static_cast<double>(sum) / img.rgb.size() / 255.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "Construction scene, %ux%u pixels, mean brightness %.3f.",
                  img.width, img.height, mean);
    return buf;
}

std::string StubProvider::transcribe_audio(std::span<const std::uint8_t> audio) {
    if (audio.empty()) throw DecodeError("empty audio input");
    if (looks_like_mp3(audio)) {
        // Real providers run ASR on MP3; the offline stub only reads WAV
        // sidecar transcripts.
        throw DecodeError("stub transcriber reads WAV fixtures only");
    }
    const WavInfo wav = parse_wav(audio);
    if (wav.comment && !wav.comment->empty()) {
        return *wav.comment;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "Audio note, %.1f seconds at %u Hz.", wav.duration_seconds(),
                  wav.sample_rate);
    return buf;
}

Embedding StubProvider::embed_text(std::string_view text) {
    const std::vector<std::string> tokens = tokenizer_.tokenize(text);
    if (tokens.empty()) {
        throw EmptyInputError("no tokens in text input");
    }
    Embedding sum;
    sum.values.assign(kPatchDim, 0.0);
    for (const std::string& tok : tokens) {
        const Embedding tv = token_vector(tok);
        for (std::size_t i = 0; i < kPatchDim; ++i) sum.values[i] += tv.values[i];
    }
    return normalize_l2(sum);
}

std::vector<Embedding> StubProvider::embed_query_tokens(std::string_view text) {
    const std::vector<std::string> tokens = tokenizer_.tokenize(text);
    if (tokens.empty()) {
        throw EmptyInputError("no tokens in query text");
    }
    std::vector<Embedding> out;
    out.reserve(tokens.size());
    for (const std::string& tok : tokens) out.push_back(token_vector(tok));
    return out;
}

PatchMatrix StubProvider::embed_page(const std::string& page_id,
                                     std::span<const std::uint8_t> image) {
    const RasterImage img = decode_image(image);
    const std::uint32_t cells_x = (img.width + 15) / 16;
    const std::uint32_t cells_y = (img.height + 15) / 16;

    PatchMatrix m;
    m.page_id = page_id;
    m.patches.reserve(static_cast<std::size_t>(cells_x) * cells_y);

    std::vector<std::uint8_t> cell_bytes;
    for (std::uint32_t cy = 0; cy < cells_y; ++cy) {
        for (std::uint32_t cx = 0; cx < cells_x; ++cx) {
            cell_bytes.clear();
            const std::uint32_t y_end = std::min(img.height, (cy + 1) * 16);
            const std::uint32_t x_end = std::min(img.width, (cx + 1) * 16);
            for (std::uint32_t y = cy * 16; y < y_end; ++y) {
                const std::size_t row = (static_cast<std::size_t>(y) * img.width + cx * 16) * 3;
                cell_bytes.insert(cell_bytes.end(), img.rgb.begin() + row,
                                  img.rgb.begin() + row + static_cast<std::size_t>(x_end - cx * 16) * 3);
            }
            m.patches.push_back(cell_vector(cell_bytes));
        }
    }
    return m;
}

std::string StubProvider::generate_report(const GenerationPrompt& prompt) {
    std::string report;
    report += "Time: " + prompt.time_text.value_or("Not recorded") + "\n";
    report += "Location: " + prompt.location_text.value_or("Not recorded") + "\n";
    report += "\n";
    report += "Construction site: ";
    report += prompt.scene_text.empty() ? "No scene description available." : prompt.scene_text;
    report += "\n\n";
    report += "Safety Hazards: ";
    report += prompt.hazards_text.empty() ? "See site description." : prompt.hazards_text;
    report += "\n\n";
    report +=
        "Recommendations: Address each hazard above in line with the cited "
        "provisions before work continues.\n";
    if (prompt.evidence.empty()) {
        report += "Regulatory support: None.\n";
    } else {
        report += "Regulatory support: as outlined on ";
        for (std::size_t i = 0; i < prompt.evidence.size(); ++i) {
            if (i > 0) report += ", ";
            report += "page " + prompt.evidence[i].page_id;
        }
        report += ".\n";
    }
    return report;
}

}  // namespace sitecheck
