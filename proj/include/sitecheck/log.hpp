// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace sitecheck {

enum class LogLevel { kQuiet, kInfo };

void set_log_level(LogLevel level);
LogLevel log_level();

/// Emits one structured line to stderr:
///   ts=<iso8601> stage=<stage> item=<id> ms=<duration> outcome=<outcome> [detail=...]
/// Suppressed entirely at kQuiet unless outcome is "failed".
void log_event(const std::string& stage, const std::string& item, const std::string& outcome,
               double duration_ms, const std::string& detail = "");

}  // namespace sitecheck
