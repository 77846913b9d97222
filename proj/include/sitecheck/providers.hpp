// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitecheck/embedding.hpp"
#include "sitecheck/errors.hpp"

namespace sitecheck {

/// Connection settings for one remote model capability. `api_key_ref` names
/// an environment variable; the secret itself never lives in config or logs.
struct ProviderConfig {
    std::string endpoint_url;
    std::string api_key_ref;
    std::string model_id;
    double timeout_s = 30.0;
    int max_retries = 2;
    int max_concurrent_requests = 4;

    /// Throws ConfigError when invariants are violated (timeout > 0,
    /// max_retries >= 0, max_concurrent_requests >= 1, non-empty endpoint).
    void validate() const;
};

/// Lowercases ASCII and splits on any non-alphanumeric byte. Stop words are
/// dropped after lowercasing; the default list is empty.
struct Tokenizer {
    std::vector<std::string> stopwords;

    std::vector<std::string> tokenize(std::string_view text) const;
};

struct EvidenceExcerpt {
    std::string page_id;
    std::string excerpt;  // page caption when available, otherwise just the id
};

/// Structured context handed to a report generator. `rendered` is the full
/// prompt text assembled from the versioned template; the offline stub works
/// from the structured fields instead.
struct GenerationPrompt {
    std::string observation_text;
    std::optional<std::string> time_text;
    std::optional<std::string> location_text;
    std::string scene_text;
    std::string hazards_text;
    std::vector<EvidenceExcerpt> evidence;
    std::string rendered;
};

class Captioner {
public:
    virtual ~Captioner() = default;
    /// Scene description for a PNG/JPEG image. Never returns an empty string.
    virtual std::string caption_image(std::span<const std::uint8_t> image) = 0;
};

class Transcriber {
public:
    virtual ~Transcriber() = default;
    /// Transcript for a WAV/MP3 clip. Never returns an empty string.
    virtual std::string transcribe_audio(std::span<const std::uint8_t> audio) = 0;
};

class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    /// Unit-normalized sentence embedding of provider-defined dimension.
    virtual Embedding embed_text(std::string_view text) = 0;
    /// One unit vector of dimension kPatchDim per query token, in order.
    virtual std::vector<Embedding> embed_query_tokens(std::string_view text) = 0;
};

class PageEmbedder {
public:
    virtual ~PageEmbedder() = default;
    /// Multi-vector embedding of a regulation page image: one unit vector of
    /// dimension kPatchDim per 16x16-pixel cell.
    virtual PatchMatrix embed_page(const std::string& page_id,
                                   std::span<const std::uint8_t> image) = 0;
};

class ReportGenerator {
public:
    virtual ~ReportGenerator() = default;
    virtual std::string generate_report(const GenerationPrompt& prompt) = 0;
};

/// Bundle of capability clients the pipeline consumes.
struct Providers {
    std::shared_ptr<Captioner> captioner;
    std::shared_ptr<Transcriber> transcriber;
    std::shared_ptr<TextEmbedder> text_embedder;
    std::shared_ptr<PageEmbedder> page_embedder;
    std::shared_ptr<ReportGenerator> generator;
};

// ---------------------------------------------------------------------------
// Deterministic offline stub
// ---------------------------------------------------------------------------

/// Offline provider: every capability is a pure function of its input bytes,
/// so batches are reproducible across process restarts and CI never needs
/// network or keys.
///
/// Captions pass through a PNG "caption" text chunk when present; transcripts
/// come from the WAV INFO/ICMT sidecar; text embeddings are normalized sums
/// of hash-keyed token vectors; page patches hash 16x16 pixel cells.
class StubProvider : public Captioner,
                     public Transcriber,
                     public TextEmbedder,
                     public PageEmbedder,
                     public ReportGenerator {
public:
    explicit StubProvider(Tokenizer tokenizer = {});

    std::string caption_image(std::span<const std::uint8_t> image) override;
    std::string transcribe_audio(std::span<const std::uint8_t> audio) override;
    Embedding embed_text(std::string_view text) override;
    std::vector<Embedding> embed_query_tokens(std::string_view text) override;
    PatchMatrix embed_page(const std::string& page_id,
                           std::span<const std::uint8_t> image) override;
    std::string generate_report(const GenerationPrompt& prompt) override;

    /// Unit kPatchDim vector for one token, keyed by its FNV-1a hash.
    static Embedding token_vector(std::string_view token);

    const Tokenizer& tokenizer() const { return tokenizer_; }

private:
    Tokenizer tokenizer_;
};

// ---------------------------------------------------------------------------
// Remote HTTP provider
// ---------------------------------------------------------------------------

/// Raised inside transports for connection-level failures; the provider
/// client translates it into retry decisions.
class TransportError : public Error {
public:
    TransportError(const std::string& msg, bool timed_out) : Error(msg), timed_out(timed_out) {}
    bool timed_out;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal POST-only transport, injectable for fault testing.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post_json(const std::string& url,
                                   const std::vector<std::pair<std::string, std::string>>& headers,
                                   const std::string& body, double timeout_s) = 0;
};

/// Production transport backed by cpp-httplib (plain HTTP).
std::shared_ptr<HttpTransport> make_httplib_transport();

/// Remote gateway speaking the JSON wire contract (docs/provider_contract.md).
/// Transient failures (5xx, timeouts, connection errors) are retried with
/// exponential backoff starting at 0.5 s, factor 2; 4xx fails immediately.
/// A call fails only after max_retries + 1 attempts. Outbound requests are
/// capped at max_concurrent_requests; the client is shareable across threads.
class HttpProvider : public Captioner,
                     public Transcriber,
                     public TextEmbedder,
                     public PageEmbedder,
                     public ReportGenerator {
public:
    using Sleeper = std::function<void(double seconds)>;

    explicit HttpProvider(ProviderConfig config,
                          std::shared_ptr<HttpTransport> transport = nullptr,
                          Sleeper sleeper = nullptr);
    ~HttpProvider() override;

    std::string caption_image(std::span<const std::uint8_t> image) override;
    std::string transcribe_audio(std::span<const std::uint8_t> audio) override;
    Embedding embed_text(std::string_view text) override;
    std::vector<Embedding> embed_query_tokens(std::string_view text) override;
    PatchMatrix embed_page(const std::string& page_id,
                           std::span<const std::uint8_t> image) override;
    std::string generate_report(const GenerationPrompt& prompt) override;

    const ProviderConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace sitecheck
