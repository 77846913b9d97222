// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace sitecheck {

/// Parsed RIFF/WAVE container. The INFO/ICMT comment chunk carries the
/// sidecar transcript used by the offline transcription stub.
struct WavInfo {
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
    std::size_t data_bytes = 0;
    std::optional<std::string> comment;  // LIST/INFO ICMT payload

    double duration_seconds() const {
        const std::size_t bytes_per_sec =
            static_cast<std::size_t>(sample_rate) * channels * (bits_per_sample / 8);
        return bytes_per_sec == 0 ? 0.0 : static_cast<double>(data_bytes) / bytes_per_sec;
    }
};

/// Parses a WAV container (fmt + data chunks required).
/// Throws DecodeError for truncated or non-WAV input.
WavInfo parse_wav(std::span<const std::uint8_t> bytes);

bool looks_like_wav(std::span<const std::uint8_t> bytes);
bool looks_like_mp3(std::span<const std::uint8_t> bytes);

}  // namespace sitecheck
