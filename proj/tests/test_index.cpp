// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sitecheck/errors.hpp"
#include "sitecheck/index.hpp"
#include "sitecheck/io.hpp"
#include "support/fixtures.hpp"

using namespace sitecheck;
using sitecheck::testing::TempDir;
using sitecheck::testing::random_unit_vec;

// ---------------------------------------------------------------------------
// Independent brute-force oracle. Deliberately naive: explicit cosine with
// norm division, plain double loops, its own sort.
// ---------------------------------------------------------------------------
namespace oracle {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double maxsim(const std::vector<std::vector<double>>& tokens,
              const std::vector<std::vector<double>>& patches) {
    double total = 0.0;
    for (const auto& q : tokens) {
        double best = -2.0;
        for (const auto& d : patches) {
            const double c = cosine(q, d);
            if (c > best) best = c;
        }
        total += best;
    }
    return total;
}

// Full ranking: (score desc, ordinal asc).
std::vector<std::pair<double, std::size_t>> ranking(
    const std::vector<std::vector<std::vector<double>>>& pages,
    const std::vector<std::vector<double>>& tokens) {
    std::vector<std::pair<double, std::size_t>> out;
    for (std::size_t p = 0; p < pages.size(); ++p) out.emplace_back(maxsim(tokens, pages[p]), p);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    return out;
}

}  // namespace oracle

namespace {

Embedding vec(std::initializer_list<double> values) {
    return Embedding{std::vector<double>(values)};
}

PatchMatrix random_page(const std::string& id, SplitMix64& gen, std::size_t patches) {
    PatchMatrix m;
    m.page_id = id;
    for (std::size_t i = 0; i < patches; ++i) m.patches.push_back(random_unit_vec(gen));
    return m;
}

// Pull the exact float32 rows the index stores back out for the oracle, so
// both sides rank the same input.
std::vector<std::vector<std::vector<double>>> stored_pages(const PatchIndex& index) {
    std::vector<std::vector<std::vector<double>>> pages;
    for (std::size_t p = 0; p < index.page_count(); ++p) {
        std::vector<std::vector<double>> rows;
        const auto payload = index.payload(p);
        for (std::size_t r = 0; r < payload.size() / kPatchDim; ++r) {
            std::vector<double> row(kPatchDim);
            for (std::size_t i = 0; i < kPatchDim; ++i) {
                row[i] = static_cast<double>(payload[r * kPatchDim + i]);
            }
            rows.push_back(std::move(row));
        }
        pages.push_back(std::move(rows));
    }
    return pages;
}

}  // namespace

TEST_CASE("cosine closed forms") {
    const Embedding e1 = vec({1.0, 0.0});
    const Embedding e2 = vec({0.0, 1.0});
    const Embedding diag = vec({1.0, 1.0});

    CHECK(cosine(e1, e1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(e1, e2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine(e1, diag) == doctest::Approx(0.7071).epsilon(1e-4));
}

TEST_CASE("cosine error paths and clamping") {
    CHECK_THROWS_AS(cosine(vec({1.0, 0.0}), vec({1.0, 0.0, 0.0})), DimMismatchError);
    CHECK_THROWS_AS(cosine(vec({0.0, 0.0}), vec({1.0, 0.0})), DegenerateVectorError);

    // Values that would overshoot 1.0 after division stay clamped.
    const Embedding a = vec({1e-7, 1e-7, 1e-7});
    CHECK(cosine(a, a) <= 1.0);
    CHECK(cosine(a, a) == doctest::Approx(1.0));
}

TEST_CASE("maxsim worked examples") {
    PatchMatrix page;
    page.page_id = "p";
    page.patches = {vec({1.0, 0.0})};
    CHECK(maxsim_score({vec({1.0, 0.0})}, page) == doctest::Approx(1.0).epsilon(1e-12));

    page.patches = {vec({1.0, 0.0}), vec({0.6, 0.8})};
    const std::vector<Embedding> tokens = {vec({1.0, 0.0}), vec({0.0, 1.0})};
    CHECK(maxsim_score(tokens, page) == doctest::Approx(1.8).epsilon(1e-6));
}

TEST_CASE("maxsim equals the exhaustive double-loop oracle on random instances") {
    SplitMix64 gen(42);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n_patches = 1 + gen.next() % 16;
        const std::size_t n_tokens = 1 + gen.next() % 6;
        PatchMatrix page = random_page("p", gen, n_patches);
        std::vector<Embedding> tokens;
        std::vector<std::vector<double>> raw_tokens, raw_patches;
        for (std::size_t t = 0; t < n_tokens; ++t) {
            tokens.push_back(random_unit_vec(gen));
            raw_tokens.push_back(tokens.back().values);
        }
        for (const auto& p : page.patches) raw_patches.push_back(p.values);

        const double expected = oracle::maxsim(raw_tokens, raw_patches);
        CHECK(maxsim_score(tokens, page) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("search full ranking matches the oracle") {
    SplitMix64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n_pages = 2 + gen.next() % 9;
        std::vector<PatchMatrix> pages;
        for (std::size_t p = 0; p < n_pages; ++p) {
            pages.push_back(random_page("page_" + std::to_string(p), gen, 1 + gen.next() % 32));
        }
        const PatchIndex index = PatchIndex::from_matrices(pages);

        const std::size_t n_tokens = 1 + gen.next() % 8;
        std::vector<Embedding> tokens;
        std::vector<std::vector<double>> raw_tokens;
        for (std::size_t t = 0; t < n_tokens; ++t) {
            tokens.push_back(random_unit_vec(gen));
            raw_tokens.push_back(tokens.back().values);
        }

        const auto expected = oracle::ranking(stored_pages(index), raw_tokens);
        const auto got = search_tokens(index, tokens, static_cast<int>(n_pages));
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].page_id == index.page_id(expected[i].second));
            CHECK(got[i].score == doctest::Approx(expected[i].first).epsilon(1e-9));
            CHECK(got[i].rank == static_cast<int>(i) + 1);
        }
    }
}

TEST_CASE("planted page containing the query token vectors ranks first") {
    std::vector<Embedding> tokens;
    for (const char* word : {"fall", "protection", "harness"}) {
        tokens.push_back(StubProvider::token_vector(word));
    }

    SplitMix64 gen(99);
    std::vector<PatchMatrix> pages;
    for (int p = 0; p < 6; ++p) {
        pages.push_back(random_page("noise_" + std::to_string(p), gen, 12));
    }
    PatchMatrix planted;
    planted.page_id = "planted";
    planted.patches = tokens;
    planted.patches.push_back(random_unit_vec(gen));
    pages.insert(pages.begin() + 3, planted);

    const PatchIndex index = PatchIndex::from_matrices(pages);
    StubProvider provider;
    const auto results = search(index, "fall protection harness", 3, provider);
    REQUIRE(results.size() == 3);
    CHECK(results[0].page_id == "planted");
    CHECK(results[0].score == doctest::Approx(3.0).epsilon(1e-5));

    // Brute force agrees on the winner.
    std::vector<std::vector<double>> raw_tokens;
    for (const auto& t : tokens) raw_tokens.push_back(t.values);
    const auto expected = oracle::ranking(stored_pages(index), raw_tokens);
    CHECK(index.page_id(expected[0].second) == "planted");
}

TEST_CASE("identical pages tie and resolve by ordinal") {
    SplitMix64 gen(5);
    PatchMatrix a = random_page("zeta", gen, 4);
    PatchMatrix b = a;
    b.page_id = "alpha";  // later ordinal despite the smaller id
    const PatchIndex index = PatchIndex::from_matrices({a, b});
    StubProvider provider;
    const auto results = search(index, "scaffold edge", 5, provider);
    REQUIRE(results.size() == 2);
    CHECK(results[0].page_id == "zeta");
    CHECK(results[1].page_id == "alpha");
    CHECK(results[0].score == results[1].score);
}

TEST_CASE("k larger than the page count returns everything ordered") {
    SplitMix64 gen(11);
    std::vector<PatchMatrix> pages;
    for (int p = 0; p < 4; ++p) pages.push_back(random_page("p" + std::to_string(p), gen, 3));
    const PatchIndex index = PatchIndex::from_matrices(pages);
    StubProvider provider;
    const auto results = search(index, "trench spoil", 100, provider);
    REQUIRE(results.size() == 4);
    for (std::size_t i = 1; i < results.size(); ++i) {
        CHECK(results[i - 1].score >= results[i].score);
    }
}

TEST_CASE("search error paths") {
    StubProvider provider;
    const PatchIndex empty;
    CHECK_THROWS_AS(search(empty, "anything", 5, provider), EmptyIndexError);

    SplitMix64 gen(3);
    const PatchIndex index = PatchIndex::from_matrices({random_page("p", gen, 2)});
    CHECK_THROWS_AS(search(index, "   \t\n", 5, provider), EmptyQueryError);
    CHECK_THROWS_AS(search(index, "...---...", 5, provider), EmptyQueryError);
    CHECK_THROWS_AS(search_tokens(index, {random_unit_vec(gen)}, 0), ConfigError);
    CHECK_THROWS_AS(search_tokens(index, {random_unit_vec(gen, 64)}, 1), DimMismatchError);
}

TEST_CASE("property: appending a patch never decreases a page score") {
    SplitMix64 gen(17);
    for (int trial = 0; trial < 50; ++trial) {
        PatchMatrix page = random_page("p", gen, 1 + gen.next() % 8);
        std::vector<Embedding> tokens;
        const std::size_t n = 1 + gen.next() % 4;
        for (std::size_t t = 0; t < n; ++t) tokens.push_back(random_unit_vec(gen));
        const double before = maxsim_score(tokens, page);
        page.patches.push_back(random_unit_vec(gen));
        const double after = maxsim_score(tokens, page);
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("property: patch order never changes a score; page order only shifts tie groups") {
    SplitMix64 gen(23);
    for (int trial = 0; trial < 20; ++trial) {
        PatchMatrix page = random_page("p", gen, 2 + gen.next() % 10);
        std::vector<Embedding> tokens = {random_unit_vec(gen), random_unit_vec(gen)};
        const double before = maxsim_score(tokens, page);
        for (std::size_t i = page.patches.size(); i > 1; --i) {
            std::swap(page.patches[i - 1], page.patches[gen.next() % i]);
        }
        CHECK(maxsim_score(tokens, page) == doctest::Approx(before).epsilon(1e-12));
    }

    // Page shuffle: per-page scores are unchanged.
    std::vector<PatchMatrix> pages;
    for (int p = 0; p < 5; ++p) pages.push_back(random_page("p" + std::to_string(p), gen, 4));
    std::vector<Embedding> tokens = {random_unit_vec(gen)};
    const PatchIndex forward = PatchIndex::from_matrices(pages);
    std::reverse(pages.begin(), pages.end());
    const PatchIndex reversed = PatchIndex::from_matrices(pages);
    const auto a = search_tokens(forward, tokens, 5);
    const auto b = search_tokens(reversed, tokens, 5);
    std::map<std::string, double> score_a, score_b;
    for (const auto& r : a) score_a[r.page_id] = r.score;
    for (const auto& r : b) score_b[r.page_id] = r.score;
    CHECK(score_a == score_b);
}

TEST_CASE("property: score never exceeds the token count") {
    SplitMix64 gen(31);
    for (int trial = 0; trial < 30; ++trial) {
        PatchMatrix page = random_page("p", gen, 1 + gen.next() % 16);
        std::vector<Embedding> tokens;
        const std::size_t n = 1 + gen.next() % 8;
        for (std::size_t t = 0; t < n; ++t) tokens.push_back(random_unit_vec(gen));
        CHECK(maxsim_score(tokens, page) <= static_cast<double>(n) + 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

TEST_CASE("save/load round trip is bit-exact") {
    SplitMix64 gen(101);
    std::vector<PatchMatrix> pages;
    for (int p = 0; p < 5; ++p) {
        pages.push_back(random_page("page_" + std::to_string(p), gen, 1 + gen.next() % 9));
    }
    const PatchIndex index = PatchIndex::from_matrices(pages);

    TempDir dir("index");
    const auto path = dir.path() / "corpus.ssix";
    save_index(index, path);
    const PatchIndex loaded = load_index(path);
    CHECK(loaded == index);
    CHECK(loaded.fingerprint_hex() == index.fingerprint_hex());

    // Saving the loaded copy reproduces the same bytes.
    const auto path2 = dir.path() / "again.ssix";
    save_index(loaded, path2);
    CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("corrupted magic fails at offset 0") {
    SplitMix64 gen(1);
    const PatchIndex index = PatchIndex::from_matrices({random_page("p", gen, 2)});
    TempDir dir("index");
    const auto path = dir.path() / "f.ssix";
    save_index(index, path);

    auto bytes = read_file(path);
    bytes[0] = 'X';
    write_file_atomic(path, bytes);
    try {
        load_index(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset == 0);
        CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
}

TEST_CASE("version bump is rejected") {
    SplitMix64 gen(2);
    const PatchIndex index = PatchIndex::from_matrices({random_page("p", gen, 2)});
    TempDir dir("index");
    const auto path = dir.path() / "f.ssix";
    save_index(index, path);

    auto bytes = read_file(path);
    bytes[4] = 2;  // version u32le
    write_file_atomic(path, bytes);
    try {
        load_index(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset == 4);
        CHECK(std::string(e.what()).find("unsupported version") != std::string::npos);
    }
}

TEST_CASE("truncation is detected") {
    SplitMix64 gen(3);
    const PatchIndex index = PatchIndex::from_matrices({random_page("p", gen, 4)});
    TempDir dir("index");
    const auto path = dir.path() / "f.ssix";
    save_index(index, path);

    auto bytes = read_file(path);
    bytes.resize(bytes.size() / 2);
    write_file_atomic(path, bytes);
    CHECK_THROWS_AS(load_index(path), FormatError);
}

TEST_CASE("payload corruption fails the checksum") {
    SplitMix64 gen(4);
    const PatchIndex index = PatchIndex::from_matrices({random_page("p", gen, 4)});
    TempDir dir("index");
    const auto path = dir.path() / "f.ssix";
    save_index(index, path);

    auto bytes = read_file(path);
    bytes[60] ^= 0xFF;  // inside the patch payload
    write_file_atomic(path, bytes);
    try {
        load_index(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
}

TEST_CASE("duplicate page ids are rejected") {
    SplitMix64 gen(6);
    const PatchMatrix a = random_page("dup", gen, 2);
    const PatchMatrix b = random_page("dup", gen, 3);
    try {
        PatchIndex::from_matrices({a, b});
        FAIL("expected DuplicatePageError");
    } catch (const DuplicatePageError& e) {
        CHECK(e.page_id == "dup");
    }
}

TEST_CASE("build_index embeds corpus images in order and is reproducible") {
    TempDir dir("corpus");
    testing::write_corpus_pages(dir.path(), {"22", "23", "56"}, 32, 32);

    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> pages;
    for (const char* id : {"22", "23", "56"}) {
        pages.emplace_back(id, read_file(dir.path() / (std::string(id) + ".png")));
    }

    StubProvider provider;
    const PatchIndex index = build_index(pages, provider);
    REQUIRE(index.page_count() == 3);
    CHECK(index.page_id(0) == "22");
    CHECK(index.page_id(2) == "56");
    CHECK(index.patch_count(0) == 4);  // 32x32 -> 2x2 cells

    const auto path_a = dir.path() / "a.ssix";
    const auto path_b = dir.path() / "b.ssix";
    save_index(index, path_a);
    save_index(build_index(pages, provider), path_b);
    CHECK(read_file(path_a) == read_file(path_b));

    pages.emplace_back("22", pages[0].second);
    CHECK_THROWS_AS(build_index(pages, provider), DuplicatePageError);
    CHECK_THROWS_AS(build_index({}, provider), EmptyIndexError);
}
