// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/wav.hpp"

#include <cstring>

#include "sitecheck/errors.hpp"

namespace sitecheck {

namespace {

std::uint32_t read_u32le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint16_t read_u16le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[off]) |
                                      (static_cast<std::uint16_t>(b[off + 1]) << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t off, const char* tag) {
    return std::memcmp(b.data() + off, tag, 4) == 0;
}

std::string trim_nuls(const std::uint8_t* data, std::size_t len) {
    while (len > 0 && data[len - 1] == 0) --len;
    return std::string(reinterpret_cast<const char*>(data), len);
}

}  // namespace

bool looks_like_wav(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 12 && tag_is(bytes, 0, "RIFF") && tag_is(bytes, 8, "WAVE");
}

bool looks_like_mp3(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 3 && bytes[0] == 'I' && bytes[1] == 'D' && bytes[2] == '3') return true;
    return bytes.size() >= 2 && bytes[0] == 0xFF && (bytes[1] & 0xE0) == 0xE0;
}

WavInfo parse_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw DecodeError("empty audio input");
    if (!looks_like_wav(bytes)) {
        throw DecodeError("not a RIFF/WAVE container");
    }

    WavInfo info;
    bool have_fmt = false;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::size_t chunk_size = read_u32le(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) {
            throw DecodeError("truncated WAV chunk");
        }
        if (tag_is(bytes, pos, "fmt ")) {
            if (chunk_size < 16) throw DecodeError("malformed WAV fmt chunk");
            info.channels = read_u16le(bytes, body + 2);
            info.sample_rate = read_u32le(bytes, body + 4);
            info.bits_per_sample = read_u16le(bytes, body + 14);
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            info.data_bytes = chunk_size;
            have_data = true;
        } else if (tag_is(bytes, pos, "LIST") && chunk_size >= 4 && tag_is(bytes, body, "INFO")) {
            // Walk the INFO sub-chunks looking for the ICMT comment.
            std::size_t sub = body + 4;
            const std::size_t list_end = body + chunk_size;
            while (sub + 8 <= list_end) {
                const std::size_t sub_size = read_u32le(bytes, sub + 4);
                if (sub + 8 + sub_size > list_end) throw DecodeError("truncated WAV INFO chunk");
                if (tag_is(bytes, sub, "ICMT")) {
                    info.comment = trim_nuls(bytes.data() + sub + 8, sub_size);
                }
                sub += 8 + sub_size + (sub_size & 1);  // chunks are word-aligned
            }
        }
        pos = body + chunk_size + (chunk_size & 1);
    }

    if (!have_fmt || !have_data) {
        throw DecodeError("WAV missing fmt or data chunk");
    }
    return info;
}

}  // namespace sitecheck
