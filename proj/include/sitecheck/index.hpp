// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sitecheck/embedding.hpp"
#include "sitecheck/providers.hpp"

namespace sitecheck {

/// One retrieval result: page id, summed MaxSim score, 1-based rank.
struct RankedPage {
    std::string page_id;
    double score = 0.0;
    int rank = 0;

    bool operator==(const RankedPage&) const = default;
};

/// Immutable multi-vector index over regulation pages.
///
/// The canonical payload is float32 row-major patch data, exactly what the
/// on-disk format stores; scoring uses a derived double-precision copy with
/// each row renormalized to unit length, so cosine collapses to a plain dot
/// product. The index is safe for concurrent searches once built.
class PatchIndex {
public:
    PatchIndex() = default;

    /// Builds from in-memory patch matrices in the given order.
    /// Throws DuplicatePageError for repeated page ids.
    static PatchIndex from_matrices(const std::vector<PatchMatrix>& pages);

    std::size_t dim() const { return kPatchDim; }
    std::size_t page_count() const { return pages_.size(); }
    std::size_t total_patches() const;

    const std::string& page_id(std::size_t ordinal) const { return pages_[ordinal].id; }
    std::uint32_t patch_count(std::size_t ordinal) const { return pages_[ordinal].patch_count; }
    std::optional<std::size_t> ordinal_of(const std::string& page_id) const;

    /// Canonical float32 rows for one page (patch_count x dim).
    std::span<const float> payload(std::size_t ordinal) const;
    /// Renormalized double rows used by the scoring kernel.
    std::span<const double> scoring_rows(std::size_t ordinal) const;

    const std::array<std::uint8_t, 32>& fingerprint() const { return fingerprint_; }
    std::string fingerprint_hex() const;

    bool operator==(const PatchIndex& other) const;

private:
    struct PageEntry {
        std::string id;
        std::uint32_t patch_count = 0;
        std::size_t offset = 0;  // element offset into payload_
    };

    void add_page(const std::string& id, const std::vector<float>& rows);
    void rebuild_scoring();

    std::vector<PageEntry> pages_;
    std::vector<float> payload_;
    std::vector<double> scoring_;
    std::array<std::uint8_t, 32> fingerprint_{};
    std::unordered_map<std::string, std::size_t> ordinals_;

    friend PatchIndex build_index(
        const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& pages,
        PageEmbedder& embedder);
    friend PatchIndex load_index(const std::filesystem::path& path);
};

/// Cosine similarity (q . d) / (|q| |d|), clamped to [-1, 1].
/// Throws DimMismatchError / DegenerateVectorError.
double cosine(const Embedding& q, const Embedding& d);

/// Late-interaction page score: sum over query tokens of the maximum cosine
/// against any patch of the page.
double maxsim_score(const std::vector<Embedding>& query, const PatchMatrix& page);

/// Scores every page against pre-embedded query tokens and returns the top
/// min(k, page_count) pages, ordered by descending score with ties broken by
/// ascending page ordinal.
std::vector<RankedPage> search_tokens(const PatchIndex& index,
                                      const std::vector<Embedding>& tokens, int k);

/// Embeds `query_text` through the provider and ranks pages as above.
/// Throws EmptyQueryError / EmptyIndexError.
std::vector<RankedPage> search(const PatchIndex& index, const std::string& query_text, int k,
                               TextEmbedder& embedder);

/// Embeds each page image and assembles the index in input order. The corpus
/// fingerprint is a SHA-256 over page ids and raw image bytes.
PatchIndex build_index(const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& pages,
                       PageEmbedder& embedder);

/// Binary index file, little-endian: magic "SSIX", version u32 = 1, dim u32,
/// page_count u32, 32-byte corpus fingerprint, then per page: id_len u16,
/// id bytes, patch_count u32, patch_count*dim float32 row-major; trailing
/// CRC32 of all preceding bytes.
void save_index(const PatchIndex& index, const std::filesystem::path& path);

/// Loads and validates an index file. Throws FormatError (with byte offset)
/// for bad magic, version, truncation, checksum or payload violations.
PatchIndex load_index(const std::filesystem::path& path);

}  // namespace sitecheck
