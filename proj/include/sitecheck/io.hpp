// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sitecheck {

/// Reads a whole file; throws IoError when unreadable.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file followed by rename, so readers never
/// observe a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Sorted list of regular files in `dir` whose lowercase extension is in
/// `extensions` (e.g. {".png", ".jpg"}). Throws IoError for missing dirs.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              const std::vector<std::string>& extensions);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace sitecheck
