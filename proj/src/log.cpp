// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>

namespace sitecheck {

namespace {
std::atomic<LogLevel> g_level{LogLevel::kQuiet};
std::mutex g_mutex;
}  // namespace

void set_log_level(LogLevel level) {
    g_level.store(level);
}

LogLevel log_level() {
    return g_level.load();
}

void log_event(const std::string& stage, const std::string& item, const std::string& outcome,
               double duration_ms, const std::string& detail) {
    if (g_level.load() == LogLevel::kQuiet && outcome != "failed") return;

    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char ts[32];
    std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", &tm);

    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "ts=%s stage=%s item=%s ms=%.1f outcome=%s", ts, stage.c_str(),
                 item.c_str(), duration_ms, outcome.c_str());
    if (!detail.empty()) std::fprintf(stderr, " detail=%s", detail.c_str());
    std::fputc('\n', stderr);
}

}  // namespace sitecheck
