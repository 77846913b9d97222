// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/config.hpp"

#include <json.hpp>

#include "sitecheck/errors.hpp"
#include "sitecheck/io.hpp"

namespace sitecheck {

using nlohmann::json;

namespace {

const std::vector<std::string> kCapabilities = {"caption", "transcribe", "embed_text",
                                                "embed_page", "generate"};

ProviderSpec provider_spec_from_json(const std::string& capability, const json& v) {
    ProviderSpec spec;
    if (v.is_string()) {
        if (v.get<std::string>() != "stub") {
            throw ConfigError("provider '" + capability + "': string value must be \"stub\"");
        }
        spec.stub = true;
        return spec;
    }
    if (!v.is_object()) {
        throw ConfigError("provider '" + capability + "': expected \"stub\" or an object");
    }
    spec.stub = false;
    try {
        spec.http.endpoint_url = v.at("endpoint_url").get<std::string>();
        spec.http.model_id = v.at("model_id").get<std::string>();
        spec.http.api_key_ref = v.value("api_key_ref", std::string{});
        spec.http.timeout_s = v.value("timeout_s", 30.0);
        spec.http.max_retries = v.value("max_retries", 2);
        spec.http.max_concurrent_requests = v.value("max_concurrent_requests", 4);
    } catch (const json::exception& e) {
        throw ConfigError("provider '" + capability + "': " + e.what());
    }
    return spec;
}

}  // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::kNoRag: return "no-rag";
        case RunMode::kImage: return "image";
        case RunMode::kImageAudio: return "image-audio";
    }
    return "image-audio";
}

RunMode run_mode_from_string(const std::string& name) {
    if (name == "no-rag") return RunMode::kNoRag;
    if (name == "image") return RunMode::kImage;
    if (name == "image-audio") return RunMode::kImageAudio;
    throw ConfigError("unknown mode: " + name + " (expected no-rag, image or image-audio)");
}

const ProviderSpec& RunConfig::provider(const std::string& capability) const {
    static const ProviderSpec stub_spec{};
    const auto it = providers.find(capability);
    return it == providers.end() ? stub_spec : it->second;
}

void RunConfig::validate() const {
    if (retrieval.k < 1) throw ConfigError("retrieval.k must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (retrieval.query_text != "fused" && retrieval.query_text != "caption") {
        throw ConfigError("retrieval.query_text must be \"fused\" or \"caption\"");
    }
    for (const auto& [capability, spec] : providers) {
        if (std::find(kCapabilities.begin(), kCapabilities.end(), capability) ==
            kCapabilities.end()) {
            throw ConfigError("unknown provider capability: " + capability);
        }
        if (!spec.stub) spec.http.validate();
    }
}

RunConfig run_config_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unparsable config JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "providers") {
            for (const auto& [capability, spec] : value.items()) {
                cfg.providers.emplace(capability, provider_spec_from_json(capability, spec));
            }
        } else if (key == "match") {
            cfg.match.time_window_min = value.value("time_window_min", cfg.match.time_window_min);
            cfg.match.location_threshold =
                value.value("location_threshold", cfg.match.location_threshold);
        } else if (key == "retrieval") {
            cfg.retrieval.k = value.value("k", cfg.retrieval.k);
            if (value.contains("mode")) {
                cfg.retrieval.mode = run_mode_from_string(value["mode"].get<std::string>());
            }
            cfg.retrieval.query_text = value.value("query_text", cfg.retrieval.query_text);
            if (value.contains("stopwords")) {
                for (const auto& w : value["stopwords"]) {
                    cfg.retrieval.stopwords.push_back(w.get<std::string>());
                }
            }
        } else if (key == "paths") {
            cfg.paths.corpus = value.value("corpus", std::string{});
            cfg.paths.index = value.value("index", std::string{});
            cfg.paths.images = value.value("images", std::string{});
            cfg.paths.audio = value.value("audio", std::string{});
            cfg.paths.output = value.value("output", std::string{});
        } else if (key == "parallelism") {
            cfg.parallelism = value.get<int>();
        } else if (key == "prompt_template") {
            cfg.prompt_template = std::filesystem::path(value.get<std::string>());
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return run_config_from_json(read_text_file(path));
}

Providers make_providers(const RunConfig& config) {
    config.validate();
    const auto stub = std::make_shared<StubProvider>(Tokenizer{config.retrieval.stopwords});

    const auto http_for = [&](const std::string& capability) -> std::shared_ptr<HttpProvider> {
        return std::make_shared<HttpProvider>(config.provider(capability).http);
    };

    Providers p;
    p.captioner = config.provider("caption").stub
                      ? std::static_pointer_cast<Captioner>(stub)
                      : std::static_pointer_cast<Captioner>(http_for("caption"));
    p.transcriber = config.provider("transcribe").stub
                        ? std::static_pointer_cast<Transcriber>(stub)
                        : std::static_pointer_cast<Transcriber>(http_for("transcribe"));
    p.text_embedder = config.provider("embed_text").stub
                          ? std::static_pointer_cast<TextEmbedder>(stub)
                          : std::static_pointer_cast<TextEmbedder>(http_for("embed_text"));
    p.page_embedder = config.provider("embed_page").stub
                          ? std::static_pointer_cast<PageEmbedder>(stub)
                          : std::static_pointer_cast<PageEmbedder>(http_for("embed_page"));
    p.generator = config.provider("generate").stub
                      ? std::static_pointer_cast<ReportGenerator>(stub)
                      : std::static_pointer_cast<ReportGenerator>(http_for("generate"));
    return p;
}

}  // namespace sitecheck
