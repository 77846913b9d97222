// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sitecheck/embedding.hpp"
#include "sitecheck/hashing.hpp"

namespace sitecheck::testing {

/// In-memory PNG encode (8-bit RGB) with optional tEXt chunks.
std::vector<std::uint8_t> make_png(
    std::uint32_t width, std::uint32_t height, const std::vector<std::uint8_t>& rgb,
    const std::vector<std::pair<std::string, std::string>>& text_chunks = {});

/// Deterministic pixel noise keyed by `seed`.
std::vector<std::uint8_t> seeded_rgb(std::uint32_t width, std::uint32_t height,
                                     std::uint64_t seed);

/// PNG whose "caption" text chunk carries the given annotation text.
std::vector<std::uint8_t> make_annotated_png(std::uint32_t width, std::uint32_t height,
                                             std::uint64_t pixel_seed,
                                             const std::string& caption_text);

/// Baseline JPEG with deterministic pixels (for decode-path tests).
std::vector<std::uint8_t> make_jpeg(std::uint32_t width, std::uint32_t height,
                                    std::uint64_t pixel_seed);

/// PCM16 mono WAV with the transcript stored in the INFO/ICMT sidecar chunk.
std::vector<std::uint8_t> make_wav(const std::string& transcript, double seconds = 0.5,
                                   std::uint32_t sample_rate = 8000);

/// Uniform random unit vector (test-side generator).
Embedding random_unit_vec(SplitMix64& gen, std::size_t dim = kPatchDim);

/// Scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Planted matching fixture: 25 true image/audio pairs plus 3 decoy audio
/// notes with distant locations. Times are spaced 30 minutes apart; the
/// first 15 pairs share exact timestamps, the rest sit inside the 15-minute
/// window. Several locations are near-miss spelling variants.
struct PlantedFixture {
    struct Item {
        std::string id;
        std::string annotation;  // "Time:/Location:" header plus body text
    };
    std::vector<Item> images;                               // 25
    std::vector<Item> audio;                                // 25 true + 3 decoys
    std::vector<std::pair<std::string, std::string>> truth;  // image id -> audio id
    std::map<std::string, std::string> decoy_reasons;        // decoy id -> expected reason
};

PlantedFixture make_planted_fixture();

/// Sample annotation texts shared across suites (header + body).
inline constexpr const char* kSampleImageCaption =
    "Time: 02/02/2025 8:00 AM\n"
    "Location: 12 York St, Sydney, NSW 2000\n"
    "The image shows a construction site with two workers on scaffolding. One worker is "
    "standing on a platform, and another is assisting with some scaffolding elements.";

inline constexpr const char* kSampleAudioTranscript =
    "Time: 02/02/2025 8:00 a.m.\n"
    "Location: 12 York St, Sydney NSW 2000\n"
    "Two construction workers were working at height. Both wore safety helmets, but neither "
    "wore high-visibility safety reflective vests. Only one of them used a fall-proof safety "
    "harness and safety rope, while the other did not, posing a risk of falling from height.";

/// Writes images/<id>.png and audio/<id>.wav trees for the fixture.
void write_planted_batch(const std::filesystem::path& root, const PlantedFixture& fixture);

/// Writes <page_id>.png corpus pages with deterministic pixel noise.
void write_corpus_pages(const std::filesystem::path& dir,
                        const std::vector<std::string>& page_ids, std::uint32_t width = 64,
                        std::uint32_t height = 64);

}  // namespace sitecheck::testing
