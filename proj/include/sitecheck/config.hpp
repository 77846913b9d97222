// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sitecheck/matcher.hpp"
#include "sitecheck/providers.hpp"

namespace sitecheck {

/// Which inputs feed report generation: retrieval disabled, image captions
/// only, or fused image + audio.
enum class RunMode { kNoRag, kImage, kImageAudio };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);  // throws ConfigError

/// "stub" or a remote HTTP provider.
struct ProviderSpec {
    bool stub = true;
    ProviderConfig http;

    std::string model_id() const { return stub ? "stub" : http.model_id; }
};

struct RetrievalConfig {
    int k = 5;
    RunMode mode = RunMode::kImageAudio;
    std::string query_text = "fused";  // "fused" or "caption"
    std::vector<std::string> stopwords;
};

struct PathsConfig {
    std::filesystem::path corpus;
    std::filesystem::path index;
    std::filesystem::path images;
    std::filesystem::path audio;
    std::filesystem::path output;
};

/// Declarative run configuration (JSON document; see README for the schema).
/// CLI flags override individual keys one-for-one.
struct RunConfig {
    std::map<std::string, ProviderSpec> providers;  // keyed by capability
    MatchConfig match;
    RetrievalConfig retrieval;
    PathsConfig paths;
    int parallelism = 1;
    std::optional<std::filesystem::path> prompt_template;  // default: built-in

    /// Spec for one capability: "caption", "transcribe", "embed_text",
    /// "embed_page" or "generate". Defaults to the stub.
    const ProviderSpec& provider(const std::string& capability) const;

    /// Validates every invariant that does not require touching providers:
    /// k >= 1, parallelism >= 1, enum values, remote provider configs.
    /// Throws ConfigError.
    void validate() const;
};

RunConfig run_config_from_json(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Instantiates capability clients: one shared stub for all stub-configured
/// capabilities, one HTTP client per remote capability.
Providers make_providers(const RunConfig& config);

}  // namespace sitecheck
