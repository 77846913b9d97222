// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "support/e2e.hpp"

#include "sitecheck/index.hpp"
#include "sitecheck/io.hpp"
#include "support/fixtures.hpp"

namespace sitecheck::testing {

namespace fs = std::filesystem;

const std::vector<std::string>& e2e_page_ids() {
    static const std::vector<std::string> ids = {"22", "23", "44", "46", "56", "83", "84", "85"};
    return ids;
}

E2eTree prepare_e2e_tree(const fs::path& root) {
    E2eTree tree;
    tree.root = root;
    tree.images = root / "images";
    tree.audio = root / "audio";
    tree.corpus = root / "corpus";
    tree.index_file = root / "corpus.ssix";
    tree.output = root / "out";

    write_planted_batch(root, make_planted_fixture());
    write_corpus_pages(tree.corpus, e2e_page_ids(), 64, 64);

    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> pages;
    for (const std::string& id : e2e_page_ids()) {
        pages.emplace_back(id, read_file(tree.corpus / (id + ".png")));
    }
    StubProvider embedder;
    save_index(build_index(pages, embedder), tree.index_file);
    return tree;
}

RunConfig e2e_config(const E2eTree& tree, RunMode mode) {
    RunConfig cfg;
    cfg.retrieval.k = 3;
    cfg.retrieval.mode = mode;
    cfg.paths.images = tree.images;
    cfg.paths.audio = tree.audio;
    cfg.paths.corpus = tree.corpus;
    cfg.paths.index = tree.index_file;
    cfg.paths.output = tree.output;
    cfg.parallelism = 1;
    return cfg;
}

}  // namespace sitecheck::testing
