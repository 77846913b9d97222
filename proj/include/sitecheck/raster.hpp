// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sitecheck {

/// Decoded raster image, 8-bit RGB. PNG text chunks (keyword/text pairs) are
/// preserved so fixture images can carry sidecar annotations.
struct RasterImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major
    std::vector<std::pair<std::string, std::string>> text_chunks;

    /// First text chunk with the given keyword, or empty string.
    std::string text_chunk(const std::string& keyword) const;
};

/// Decodes PNG or JPEG bytes (sniffed by magic). Throws DecodeError for
/// anything else, including truncated or corrupt streams.
RasterImage decode_image(std::span<const std::uint8_t> bytes);

bool looks_like_png(std::span<const std::uint8_t> bytes);
bool looks_like_jpeg(std::span<const std::uint8_t> bytes);

}  // namespace sitecheck
