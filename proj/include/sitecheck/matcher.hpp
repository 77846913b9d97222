// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitecheck/providers.hpp"

namespace sitecheck {

/// Annotation header shared by image captions and audio transcripts:
/// leading "Time:" / "Location:" lines followed by free text.
struct AnnotationHeader {
    std::int64_t timestamp_min = 0;  // minutes since 1970-01-01T00:00 (no zone)
    std::string location_text;
    std::string body;
};

/// Header where either field may be absent; used when downstream code wants
/// to keep items with partial headers instead of failing.
struct LenientHeader {
    std::optional<std::int64_t> timestamp_min;
    std::optional<std::string> location_text;
    std::string body;
};

/// Parses "DD/MM/YYYY H:MM AM|PM|a.m.|p.m." (day first) or ISO-8601
/// "YYYY-MM-DD[T ]HH:MM[:SS]" to minutes since epoch. Returns nullopt for
/// anything else, including out-of-range calendar dates.
std::optional<std::int64_t> parse_timestamp_minutes(std::string_view text);

/// Minute-resolution ISO rendering, e.g. "2025-02-02T08:00".
std::string format_timestamp_iso(std::int64_t minutes);

/// Strict header extraction. Throws HeaderParseError naming the missing or
/// unparsable field ("time" / "location").
AnnotationHeader parse_annotation(const std::string& text);

/// Best-effort variant of parse_annotation; never throws.
LenientHeader parse_annotation_lenient(const std::string& text);

struct MatchConfig {
    double time_window_min = 15.0;
    double location_threshold = 0.75;
};

struct MatchPair {
    std::string image_id;
    std::string audio_id;
    double similarity = 0.0;
    double time_delta_min = 0.0;
};

struct UnmatchedItem {
    std::string id;
    std::string reason;
};

/// Outcome of pairing a batch: committed pairs plus leftovers with
/// machine-readable reasons ("no-candidate", "header-missing",
/// "time-window-exceeded", "below-location-threshold", "outscored").
struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<UnmatchedItem> unmatched_images;
    std::vector<UnmatchedItem> unmatched_audio;
    MatchConfig config;
};

/// One side of the pairing: an image or audio item with whatever header
/// fields could be extracted. Empty location means no usable header.
struct MatchInput {
    std::string id;
    std::optional<std::int64_t> timestamp_min;
    std::string location_text;
};

/// Cosine similarity between the embeddings of two location strings.
/// Symmetric bit-for-bit. Throws EmptyInputError / DegenerateVectorError.
double location_similarity(const std::string& a, const std::string& b, TextEmbedder& embedder);

/// Pairs images with audio notes. Phase 1 commits exact-timestamp pairs that
/// clear the location threshold, highest similarity first; phase 2 relaxes
/// to |dt| <= time_window. Items without timestamps are considered in phase 2
/// on location alone. Greedy order is (similarity desc, audio id, image id),
/// so results are independent of input order. Ids must be unique per side.
MatchResult match_pairs(const std::vector<MatchInput>& images,
                        const std::vector<MatchInput>& audio, const MatchConfig& cfg,
                        TextEmbedder& embedder);

/// matches.json rendering with fixed field names; similarity carries six
/// decimal places.
std::string match_result_to_json(const MatchResult& result);

}  // namespace sitecheck
