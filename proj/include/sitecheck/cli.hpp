// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <ostream>

#include "sitecheck/config.hpp"
#include "sitecheck/evalsuite.hpp"

namespace sitecheck {

// Stable exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;       // success
inline constexpr int kExitPartial = 1;  // per-item failures, batch completed
inline constexpr int kExitConfig = 2;   // config or usage error (nothing written)
inline constexpr int kExitFatal = 3;    // fatal I/O or data error

/// Builds the page index from <page_id>.png/jpg images in `corpus_dir` and
/// writes it to `out_path` with a human summary on `out`.
int cmd_index(const RunConfig& cfg, const std::filesystem::path& corpus_dir,
              const std::filesystem::path& out_path, std::ostream& out, std::ostream& err);

/// Captions/transcribes for header extraction only, pairs the two sides, and
/// writes matches.json.
int cmd_match(const RunConfig& cfg, const std::filesystem::path& images_dir,
              const std::filesystem::path& audio_dir, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err);

/// Runs the full batch pipeline per the config (see RunConfig paths).
int cmd_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Extracts citations from generated reports, scores them against ground
/// truth and writes metrics.json next to a printed metric table.
int cmd_eval(const std::filesystem::path& reports_dir, const std::filesystem::path& gt_path,
             Averaging averaging, const std::filesystem::path& out_path, std::ostream& out,
             std::ostream& err);

/// Prints the delta table between two metrics.json files.
int cmd_compare(const std::filesystem::path& metrics_a, const std::filesystem::path& metrics_b,
                bool also_json, std::ostream& out, std::ostream& err);

}  // namespace sitecheck
