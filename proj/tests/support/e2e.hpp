// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sitecheck/config.hpp"

namespace sitecheck::testing {

/// Canonical end-to-end tree: planted 25-pair batch, a small page corpus and
/// a prebuilt index. Shared by the pipeline suite, the golden generator and
/// the acceptance suite so they always agree on inputs.
struct E2eTree {
    std::filesystem::path root;
    std::filesystem::path images;
    std::filesystem::path audio;
    std::filesystem::path corpus;
    std::filesystem::path index_file;
    std::filesystem::path output;
};

const std::vector<std::string>& e2e_page_ids();

/// Writes fixtures under `root` and builds the index file.
E2eTree prepare_e2e_tree(const std::filesystem::path& root);

/// The canonical stub-only run configuration for the tree.
RunConfig e2e_config(const E2eTree& tree, RunMode mode);

}  // namespace sitecheck::testing
