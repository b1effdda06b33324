// Pluggable LLM completion backends: deterministic replay from fixtures, an
// HTTP chat-completions provider, and a caching wrapper, all sharing one
// telemetry surface.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace schemalink {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.3;
    int max_tokens = 4096;
    std::string tag;                // pipeline stage name, e.g. "tf_tables"
    std::int64_t example_id = -1;   // selects the replay fixture
    bool bypass_cache = false;      // repair retries force a fresh sample
};

struct StageStats {
    std::int64_t calls = 0;       // provider or replay completions
    std::int64_t cache_hits = 0;  // served without a completion
    std::int64_t prompt_chars = 0;
    std::int64_t response_chars = 0;
    std::int64_t prompt_tokens = 0;      // provider-reported; 0 otherwise
    std::int64_t completion_tokens = 0;  // provider-reported; 0 otherwise
    std::int64_t latency_ms = 0;
};

// Thread-safe per-stage counters.  Latency is wall-clock and therefore kept
// out of anything compared byte-for-byte.
class Telemetry {
public:
    void record_call(const std::string& tag, std::int64_t prompt_chars,
                     std::int64_t response_chars, std::int64_t latency_ms,
                     std::int64_t prompt_tokens = 0, std::int64_t completion_tokens = 0);
    void record_cache_hit(const std::string& tag, std::int64_t prompt_chars,
                          std::int64_t response_chars);

    StageStats stage(const std::string& tag) const;
    StageStats total() const;
    std::vector<std::pair<std::string, StageStats>> stages() const;  // sorted by tag
    std::int64_t call_count() const { return total().calls; }

    // include_latency false yields deterministic output under replay.
    nlohmann::ordered_json to_json(bool include_latency) const;

private:
    mutable std::mutex mu_;
    std::map<std::string, StageStats> stages_;
};

class Backend {
public:
    virtual ~Backend() = default;

    // Returns the raw completion text.  Throws BackendError on failure.
    virtual std::string complete(const CompletionRequest& req) = 0;

    // Stable identity (provider + model) used in cache keys.
    virtual std::string id() const = 0;

    Telemetry& telemetry() { return telemetry_; }
    const Telemetry& telemetry() const { return telemetry_; }

protected:
    Telemetry telemetry_;
};

// Serves canned responses from <root>/<example_id>/<tag>.txt.  A missing
// fixture is a BackendError naming the key.  Latency records as zero so
// replay runs are byte-deterministic.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::filesystem::path root);
    std::string complete(const CompletionRequest& req) override;
    std::string id() const override { return "replay"; }

private:
    std::filesystem::path root_;
};

// Blocks until a request slot is available; refills continuously at
// requests_per_minute with burst capacity of the same size.
class RateLimiter {
public:
    explicit RateLimiter(int requests_per_minute);
    void acquire();

private:
    double per_second_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

struct HttpBackendOptions {
    std::string name;       // provider name, part of the cache identity
    std::string base_url;   // scheme://host[:port][/path-prefix]
    std::string model;
    std::string api_key;
    int requests_per_minute = 60;
    int max_retries = 3;
    double timeout_s = 120.0;
};

// Chat-completions JSON over HTTP(S).  Transport errors, 429 and 5xx retry
// with exponential backoff; anything else surfaces as BackendError with the
// provider's message.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendOptions options);
    std::string complete(const CompletionRequest& req) override;
    std::string id() const override { return options_.name + "|" + options_.model; }

private:
    HttpBackendOptions options_;
    RateLimiter limiter_;
};

// Wraps another backend with a response cache at <dir>/<sha256>.json, keyed
// by hash(backend id, temperature, prompt).  Hits are recorded on the inner
// backend's telemetry without counting as calls; writes are atomic.
class CacheBackend : public Backend {
public:
    CacheBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir);
    std::string complete(const CompletionRequest& req) override;
    std::string id() const override { return inner_->id(); }

    Telemetry& inner_telemetry() { return inner_->telemetry(); }

    static std::string cache_key(const std::string& backend_id, double temperature,
                                 const std::string& prompt);

private:
    std::shared_ptr<Backend> inner_;
    std::filesystem::path dir_;
    std::mutex write_mu_;
};

// Forwards to a shared backend while counting on a local telemetry, giving
// per-example call accounting under a shared provider.
class RecordingBackend : public Backend {
public:
    explicit RecordingBackend(Backend& inner) : inner_(inner) {}
    std::string complete(const CompletionRequest& req) override;
    std::string id() const override { return inner_.id(); }

private:
    Backend& inner_;
};

// Completes req and extracts a JSON object from the response; on extraction
// failure retries once bypassing the cache, then lets JsonExtractError
// propagate so the caller can apply its stage fallback.
nlohmann::ordered_json complete_json(Backend& backend, CompletionRequest req);

}  // namespace schemalink
