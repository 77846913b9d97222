// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/index.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "sitecheck/errors.hpp"
#include "sitecheck/io.hpp"

namespace sitecheck {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

// Incremental SHA-256 wrapper for fingerprinting.
class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t len) { EVP_DigestUpdate(ctx_, data, len); }

    void update_u16le(std::uint16_t v) {
        const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
        update(b, 2);
    }

    void update_u64le(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        update(b, 8);
    }

    std::array<std::uint8_t, 32> finish() {
        std::array<std::uint8_t, 32> out{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, out.data(), &len);
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

void append_u16le(std::vector<std::uint8_t>& buf, std::uint16_t v) {
    buf.push_back(static_cast<std::uint8_t>(v));
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32le(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f32le(std::vector<std::uint8_t>& buf, float v) {
    append_u32le(buf, std::bit_cast<std::uint32_t>(v));
}

// Bounds-checked little-endian reader; failures carry the byte offset.
struct Cursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > bytes.size()) {
            throw FormatError(std::string("truncated index file while reading ") + what, pos);
        }
    }

    std::uint16_t u16le(const char* what) {
        need(2, what);
        const std::uint16_t v = static_cast<std::uint16_t>(
            bytes[pos] | (static_cast<std::uint16_t>(bytes[pos + 1]) << 8));
        pos += 2;
        return v;
    }

    std::uint32_t u32le(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }

    float f32le(const char* what) { return std::bit_cast<float>(u32le(what)); }

    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
};

std::vector<float> matrix_to_rows(const PatchMatrix& m) {
    if (!valid_patch_matrix(m)) {
        throw DegenerateVectorError("patch matrix for page '" + m.page_id +
                                    "' violates its invariants");
    }
    std::vector<float> rows;
    rows.reserve(m.patches.size() * kPatchDim);
    for (const Embedding& p : m.patches) {
        for (double v : p.values) rows.push_back(static_cast<float>(v));
    }
    return rows;
}

}  // namespace

// ---------------------------------------------------------------------------
// PatchIndex
// ---------------------------------------------------------------------------

void PatchIndex::add_page(const std::string& id, const std::vector<float>& rows) {
    if (ordinals_.contains(id)) {
        throw DuplicatePageError("duplicate page id: " + id, id);
    }
    PageEntry entry;
    entry.id = id;
    entry.patch_count = static_cast<std::uint32_t>(rows.size() / kPatchDim);
    entry.offset = payload_.size();
    ordinals_.emplace(id, pages_.size());
    pages_.push_back(std::move(entry));
    payload_.insert(payload_.end(), rows.begin(), rows.end());
}

void PatchIndex::rebuild_scoring() {
    scoring_.resize(payload_.size());
    const std::size_t rows = payload_.size() / kPatchDim;
    for (std::size_t r = 0; r < rows; ++r) {
        const float* src = payload_.data() + r * kPatchDim;
        double* dst = scoring_.data() + r * kPatchDim;
        double sq = 0.0;
        for (std::size_t i = 0; i < kPatchDim; ++i) {
            dst[i] = static_cast<double>(src[i]);
            sq += dst[i] * dst[i];
        }
        const double norm = std::sqrt(sq);
        if (!(norm > 1e-12)) {
            throw DegenerateVectorError("zero-norm patch row in index");
        }
        for (std::size_t i = 0; i < kPatchDim; ++i) dst[i] /= norm;
    }
}

PatchIndex PatchIndex::from_matrices(const std::vector<PatchMatrix>& pages) {
    PatchIndex index;
    Sha256 hash;
    for (const PatchMatrix& m : pages) {
        const std::vector<float> rows = matrix_to_rows(m);
        index.add_page(m.page_id, rows);
        hash.update_u16le(static_cast<std::uint16_t>(m.page_id.size()));
        hash.update(m.page_id.data(), m.page_id.size());
        hash.update_u64le(rows.size());
        hash.update(rows.data(), rows.size() * sizeof(float));
    }
    index.fingerprint_ = hash.finish();
    index.rebuild_scoring();
    return index;
}

std::size_t PatchIndex::total_patches() const {
    return payload_.size() / kPatchDim;
}

std::optional<std::size_t> PatchIndex::ordinal_of(const std::string& page_id) const {
    const auto it = ordinals_.find(page_id);
    if (it == ordinals_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> PatchIndex::payload(std::size_t ordinal) const {
    const PageEntry& p = pages_[ordinal];
    return std::span<const float>(payload_.data() + p.offset,
                                  static_cast<std::size_t>(p.patch_count) * kPatchDim);
}

std::span<const double> PatchIndex::scoring_rows(std::size_t ordinal) const {
    const PageEntry& p = pages_[ordinal];
    return std::span<const double>(scoring_.data() + p.offset,
                                   static_cast<std::size_t>(p.patch_count) * kPatchDim);
}

std::string PatchIndex::fingerprint_hex() const {
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : fingerprint_) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 15]);
    }
    return out;
}

bool PatchIndex::operator==(const PatchIndex& other) const {
    if (pages_.size() != other.pages_.size() || fingerprint_ != other.fingerprint_) return false;
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        if (pages_[i].id != other.pages_[i].id ||
            pages_[i].patch_count != other.pages_[i].patch_count) {
            return false;
        }
    }
    if (payload_.size() != other.payload_.size()) return false;
    // Bitwise payload comparison; scoring rows are derived deterministically.
    return std::memcmp(payload_.data(), other.payload_.data(),
                       payload_.size() * sizeof(float)) == 0;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

double cosine(const Embedding& q, const Embedding& d) {
    const double qn = l2_norm(q);
    const double dn = l2_norm(d);
    if (!(qn > 1e-12) || !(dn > 1e-12)) {
        throw DegenerateVectorError("cosine of (near-)zero vector");
    }
    const double value = dot(q, d) / (qn * dn);
    return std::clamp(value, -1.0, 1.0);
}

double maxsim_score(const std::vector<Embedding>& query, const PatchMatrix& page) {
    if (query.empty()) throw EmptyQueryError("no query tokens");
    if (page.patches.empty()) throw EmptyIndexError("page has no patches");
    double total = 0.0;
    for (const Embedding& token : query) {
        double best = -1.0;
        for (const Embedding& patch : page.patches) {
            best = std::max(best, cosine(token, patch));
        }
        total += best;
    }
    return total;
}

namespace {

// Hot kernel: one page against flattened query tokens. Rows are unit
// double vectors, so the dot product equals the cosine.
double score_page(std::span<const double> rows, const double* tokens, std::size_t token_count) {
    const std::size_t patch_count = rows.size() / kPatchDim;
    double total = 0.0;
    for (std::size_t t = 0; t < token_count; ++t) {
        const double* q = tokens + t * kPatchDim;
        double best = -1.0;
        const double* row = rows.data();
        for (std::size_t p = 0; p < patch_count; ++p, row += kPatchDim) {
            double acc = 0.0;
            for (std::size_t i = 0; i < kPatchDim; ++i) acc += q[i] * row[i];
            if (acc > best) best = acc;
        }
        total += best;
    }
    return total;
}

}  // namespace

std::vector<RankedPage> search_tokens(const PatchIndex& index, const std::vector<Embedding>& tokens,
                                      int k) {
    if (k < 1) throw ConfigError("search k must be >= 1");
    if (tokens.empty()) throw EmptyQueryError("query produced no tokens");
    for (const Embedding& t : tokens) {
        if (t.dim() != index.dim()) {
            throw DimMismatchError("query token dimension " + std::to_string(t.dim()) +
                                   " does not match index dimension " +
                                   std::to_string(index.dim()));
        }
    }
    if (index.page_count() == 0 || index.total_patches() == 0) {
        throw EmptyIndexError("index has no pages");
    }

    std::vector<double> flat(tokens.size() * kPatchDim);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        std::memcpy(flat.data() + t * kPatchDim, tokens[t].values.data(),
                    kPatchDim * sizeof(double));
    }

    std::vector<std::pair<double, std::size_t>> scored;  // (score, ordinal)
    scored.reserve(index.page_count());
    for (std::size_t p = 0; p < index.page_count(); ++p) {
        scored.emplace_back(score_page(index.scoring_rows(p), flat.data(), tokens.size()), p);
    }

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    const auto better = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // ordinal tie-break
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), better);

    std::vector<RankedPage> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(RankedPage{index.page_id(scored[i].second), scored[i].first,
                                 static_cast<int>(i) + 1});
    }
    return out;
}

std::vector<RankedPage> search(const PatchIndex& index, const std::string& query_text, int k,
                               TextEmbedder& embedder) {
    if (query_text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw EmptyQueryError("empty query text");
    }
    std::vector<Embedding> tokens;
    try {
        tokens = embedder.embed_query_tokens(query_text);
    } catch (const EmptyInputError& e) {
        throw EmptyQueryError(e.what());
    }
    return search_tokens(index, tokens, k);
}

// ---------------------------------------------------------------------------
// Build & persistence
// ---------------------------------------------------------------------------

PatchIndex build_index(const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& pages,
                       PageEmbedder& embedder) {
    if (pages.empty()) throw EmptyIndexError("no pages to index");

    PatchIndex index;
    Sha256 hash;
    for (const auto& [id, image] : pages) {
        PatchMatrix m;
        try {
            m = embedder.embed_page(id, image);
        } catch (const DuplicatePageError&) {
            throw;
        } catch (const Error& e) {
            throw IoError("failed to embed page '" + id + "': " + e.what());
        }
        index.add_page(id, matrix_to_rows(m));
        hash.update_u16le(static_cast<std::uint16_t>(id.size()));
        hash.update(id.data(), id.size());
        hash.update_u64le(image.size());
        hash.update(image.data(), image.size());
    }
    index.fingerprint_ = hash.finish();
    index.rebuild_scoring();
    return index;
}

void save_index(const PatchIndex& index, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buf;
    buf.reserve(48 + index.total_patches() * kPatchDim * sizeof(float));

    buf.insert(buf.end(), kMagic, kMagic + 4);
    append_u32le(buf, kFormatVersion);
    append_u32le(buf, static_cast<std::uint32_t>(index.dim()));
    append_u32le(buf, static_cast<std::uint32_t>(index.page_count()));
    buf.insert(buf.end(), index.fingerprint().begin(), index.fingerprint().end());

    for (std::size_t p = 0; p < index.page_count(); ++p) {
        const std::string& id = index.page_id(p);
        if (id.size() > 0xFFFF) {
            throw IoError("page id too long to serialize: " + id.substr(0, 32) + "...");
        }
        append_u16le(buf, static_cast<std::uint16_t>(id.size()));
        buf.insert(buf.end(), id.begin(), id.end());
        append_u32le(buf, index.patch_count(p));
        for (float v : index.payload(p)) append_f32le(buf, v);
    }

    const auto crc = static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
    append_u32le(buf, crc);

    write_file_atomic(path, buf);
}

PatchIndex load_index(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    Cursor cur{bytes, 0};

    cur.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("bad magic bytes (expected SSIX)", 0);
    }
    cur.pos = 4;
    const std::uint32_t version = cur.u32le("version");
    if (version != kFormatVersion) {
        throw FormatError("unsupported version " + std::to_string(version), 4);
    }
    const std::size_t dim_offset = cur.pos;
    const std::uint32_t dim = cur.u32le("dim");
    if (dim != kPatchDim) {
        throw FormatError("unexpected patch dimension " + std::to_string(dim), dim_offset);
    }
    const std::uint32_t page_count = cur.u32le("page count");

    PatchIndex index;
    cur.need(32, "fingerprint");
    std::memcpy(index.fingerprint_.data(), bytes.data() + cur.pos, 32);
    cur.pos += 32;

    std::vector<float> rows;
    for (std::uint32_t p = 0; p < page_count; ++p) {
        const std::uint16_t id_len = cur.u16le("page id length");
        const std::size_t id_offset = cur.pos;
        const std::string id = cur.str(id_len, "page id");
        const std::size_t count_offset = cur.pos;
        const std::uint32_t patch_count = cur.u32le("patch count");
        if (patch_count == 0) {
            throw FormatError("page '" + id + "' has zero patches", count_offset);
        }
        rows.clear();
        rows.reserve(static_cast<std::size_t>(patch_count) * kPatchDim);
        cur.need(static_cast<std::size_t>(patch_count) * kPatchDim * 4, "patch rows");
        for (std::size_t i = 0; i < static_cast<std::size_t>(patch_count) * kPatchDim; ++i) {
            rows.push_back(cur.f32le("patch value"));
        }
        try {
            index.add_page(id, rows);
        } catch (const DuplicatePageError& e) {
            throw FormatError(e.what(), id_offset);
        }
    }

    const std::size_t crc_offset = cur.pos;
    const std::uint32_t stored_crc = cur.u32le("checksum");
    if (cur.pos != bytes.size()) {
        throw FormatError("trailing bytes after checksum", cur.pos);
    }
    const auto computed_crc = static_cast<std::uint32_t>(::crc32(
        0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(crc_offset)));
    if (stored_crc != computed_crc) {
        throw FormatError("checksum mismatch", crc_offset);
    }

    try {
        index.rebuild_scoring();
    } catch (const DegenerateVectorError& e) {
        throw FormatError(e.what(), 48);
    }
    return index;
}

}  // namespace sitecheck
