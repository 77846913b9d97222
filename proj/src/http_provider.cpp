// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <semaphore>
#include <thread>

#include "sitecheck/providers.hpp"

namespace sitecheck {

using nlohmann::json;

void ProviderConfig::validate() const {
    if (endpoint_url.empty()) throw ConfigError("provider endpoint_url is empty");
    if (model_id.empty()) throw ConfigError("provider model_id is empty");
    if (!(timeout_s > 0)) throw ConfigError("provider timeout must be positive");
    if (max_retries < 0) throw ConfigError("provider max_retries must be non-negative");
    if (max_concurrent_requests < 1) {
        throw ConfigError("provider max_concurrent_requests must be >= 1");
    }
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back(alphabet[n & 63]);
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t n = bytes[i] << 16;
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

namespace {

class HttplibTransport : public HttpTransport {
public:
    HttpResponse post_json(const std::string& url,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           const std::string& body, double timeout_s) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) {
            throw TransportError("malformed endpoint URL: " + url, false);
        }
        const std::string rest = url.substr(scheme_end + 3);
        const auto slash = rest.find('/');
        const std::string host_port = url.substr(0, scheme_end + 3) +
                                      (slash == std::string::npos ? rest : rest.substr(0, slash));
        const std::string path = slash == std::string::npos ? "/" : rest.substr(slash);

        httplib::Client client(host_port);
        const auto sec = static_cast<time_t>(timeout_s);
        const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);

        httplib::Headers hdrs;
        for (const auto& [k, v] : headers) hdrs.emplace(k, v);

        auto res = client.Post(path, hdrs, body, "application/json");
        if (!res) {
            const bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                                   res.error() == httplib::Error::Read ||
                                   res.error() == httplib::Error::Write;
            throw TransportError("transport failure: " + httplib::to_string(res.error()),
                                 timed_out);
        }
        return HttpResponse{res->status, res->body};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport() {
    return std::make_shared<HttplibTransport>();
}

struct HttpProvider::Impl {
    ProviderConfig cfg;
    std::shared_ptr<HttpTransport> transport;
    Sleeper sleeper;
    std::string api_key;
    std::counting_semaphore<> gate;

    Impl(ProviderConfig c, std::shared_ptr<HttpTransport> t, Sleeper s)
        : cfg(std::move(c)),
          transport(t ? std::move(t) : make_httplib_transport()),
          sleeper(s ? std::move(s)
                    : [](double seconds) {
                          std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
                      }),
          gate(cfg.max_concurrent_requests) {}

    json call(const std::string& capability, json payload) {
        gate.acquire();
        struct Release {
            std::counting_semaphore<>& g;
            ~Release() { g.release(); }
        } release{gate};

        const json request = {
            {"model_id", cfg.model_id}, {"capability", capability}, {"payload", std::move(payload)}};
        const std::string body = request.dump();

        std::vector<std::pair<std::string, std::string>> headers;
        if (!api_key.empty()) headers.emplace_back("Authorization", "Bearer " + api_key);

        double backoff_s = 0.5;
        int attempts = 0;
        std::string last_error;
        int last_status = 0;
        bool last_timed_out = false;

        for (;;) {
            ++attempts;
            // Reaching the bottom of this loop body means a transient
            // failure (5xx or transport error); everything else returns or
            // throws from inside the try.
            try {
                const HttpResponse resp =
                    transport->post_json(cfg.endpoint_url, headers, body, cfg.timeout_s);
                if (resp.status >= 500) {
                    last_status = resp.status;
                    last_timed_out = false;
                    last_error = capability + ": server error " + std::to_string(resp.status);
                } else if (resp.status == 200) {
                    json parsed;
                    try {
                        parsed = json::parse(resp.body);
                    } catch (const json::exception& e) {
                        throw ProviderError(capability + ": unparsable provider response: " +
                                                e.what(),
                                            resp.status, attempts);
                    }
                    if (parsed.contains("error")) {
                        std::string msg = parsed["error"].is_object()
                                              ? parsed["error"].value("message", "unknown error")
                                              : parsed["error"].dump();
                        throw ProviderError(capability + ": provider error: " + msg, resp.status,
                                            attempts);
                    }
                    if (!parsed.contains("output")) {
                        throw ProviderError(capability + ": provider response missing output",
                                            resp.status, attempts);
                    }
                    return parsed["output"];
                } else {
                    // 4xx and anything else non-transient fails immediately.
                    throw ProviderError(capability + ": provider call failed with status " +
                                            std::to_string(resp.status),
                                        resp.status, attempts);
                }
            } catch (const TransportError& te) {
                last_status = 0;
                last_timed_out = te.timed_out;
                last_error = capability + ": " + te.what();
            }

            if (attempts <= cfg.max_retries) {
                sleeper(backoff_s);
                backoff_s *= 2.0;
                continue;
            }
            if (last_timed_out) {
                throw TimeoutError(last_error + " (after " + std::to_string(attempts) +
                                       " attempts)",
                                   attempts);
            }
            throw ProviderError(last_error + " (after " + std::to_string(attempts) + " attempts)",
                                last_status, attempts);
        }
    }

    std::string text_output(const std::string& capability, json payload) {
        const json out = call(capability, std::move(payload));
        if (!out.is_object() || !out.contains("text") || !out["text"].is_string()) {
            throw ProviderError(capability + ": provider response missing text output", 200, 1);
        }
        std::string text = out["text"].get<std::string>();
        if (text.empty()) {
            throw ProviderError(capability + ": provider returned empty output", 200, 1);
        }
        return text;
    }

    Embedding parse_embedding(const std::string& capability, const json& arr,
                              std::size_t required_dim) {
        if (!arr.is_array() || arr.empty()) {
            throw ProviderError(capability + ": provider returned malformed embedding", 200, 1);
        }
        Embedding e;
        e.values.reserve(arr.size());
        for (const auto& v : arr) {
            if (!v.is_number()) {
                throw ProviderError(capability + ": provider returned non-numeric embedding", 200,
                                    1);
            }
            e.values.push_back(v.get<double>());
        }
        if (required_dim != 0 && e.dim() != required_dim) {
            throw ProviderError(capability + ": provider returned embedding of dimension " +
                                    std::to_string(e.dim()) + ", expected " +
                                    std::to_string(required_dim),
                                200, 1);
        }
        try {
            normalize_l2(e);
        } catch (const DegenerateVectorError& err) {
            throw ProviderError(capability + ": provider returned degenerate embedding: " +
                                    err.what(),
                                200, 1);
        }
        return e;
    }
};

HttpProvider::HttpProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                           Sleeper sleeper) {
    config.validate();
    std::string key;
    if (!config.api_key_ref.empty()) {
        const char* value = std::getenv(config.api_key_ref.c_str());
        if (!value || !*value) {
            throw ConfigError("environment variable named by api_key_ref is not set: " +
                              config.api_key_ref);
        }
        key = value;
    }
    impl_ = std::make_unique<Impl>(std::move(config), std::move(transport), std::move(sleeper));
    impl_->api_key = std::move(key);
}

HttpProvider::~HttpProvider() = default;

const ProviderConfig& HttpProvider::config() const {
    return impl_->cfg;
}

std::string HttpProvider::caption_image(std::span<const std::uint8_t> image) {
    if (image.empty()) throw DecodeError("empty image input");
    return impl_->text_output("caption", json{{"image_b64", base64_encode(image)}});
}

std::string HttpProvider::transcribe_audio(std::span<const std::uint8_t> audio) {
    if (audio.empty()) throw DecodeError("empty audio input");
    return impl_->text_output("transcribe", json{{"audio_b64", base64_encode(audio)}});
}

Embedding HttpProvider::embed_text(std::string_view text) {
    if (text.empty()) throw EmptyInputError("empty text input");
    const json out = impl_->call("embed_text", json{{"text", std::string(text)}});
    if (!out.is_object() || !out.contains("values")) {
        throw ProviderError("embed_text: provider response missing values", 200, 1);
    }
    return impl_->parse_embedding("embed_text", out["values"], 0);
}

std::vector<Embedding> HttpProvider::embed_query_tokens(std::string_view text) {
    if (text.empty()) throw EmptyInputError("empty query text");
    const json out = impl_->call("embed_query", json{{"text", std::string(text)}});
    if (!out.is_object() || !out.contains("vectors") || !out["vectors"].is_array() ||
        out["vectors"].empty()) {
        throw ProviderError("embed_query: provider response missing vectors", 200, 1);
    }
    std::vector<Embedding> vectors;
    for (const auto& arr : out["vectors"]) {
        vectors.push_back(impl_->parse_embedding("embed_query", arr, kPatchDim));
    }
    return vectors;
}

PatchMatrix HttpProvider::embed_page(const std::string& page_id,
                                     std::span<const std::uint8_t> image) {
    if (image.empty()) throw DecodeError("empty image input");
    const json out = impl_->call(
        "embed_page", json{{"page_id", page_id}, {"image_b64", base64_encode(image)}});
    if (!out.is_object() || !out.contains("vectors") || !out["vectors"].is_array() ||
        out["vectors"].empty()) {
        throw ProviderError("embed_page: provider response missing vectors", 200, 1);
    }
    PatchMatrix m;
    m.page_id = page_id;
    for (const auto& arr : out["vectors"]) {
        m.patches.push_back(impl_->parse_embedding("embed_page", arr, kPatchDim));
    }
    return m;
}

std::string HttpProvider::generate_report(const GenerationPrompt& prompt) {
    const std::string& text = prompt.rendered.empty() ? prompt.observation_text : prompt.rendered;
    return impl_->text_output("generate", json{{"prompt", text}});
}

}  // namespace sitecheck
