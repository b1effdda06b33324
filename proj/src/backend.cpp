#include "schemalink/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
// keep the define from the build; httplib reads it
#endif
#include <httplib.h>

#include "schemalink/errors.hpp"
#include "schemalink/jsonx.hpp"
#include "schemalink/text.hpp"

namespace schemalink {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BackendError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

// ============================================================================
// Telemetry
// ============================================================================

void Telemetry::record_call(const std::string& tag, std::int64_t prompt_chars,
                            std::int64_t response_chars, std::int64_t latency_ms,
                            std::int64_t prompt_tokens, std::int64_t completion_tokens) {
    std::lock_guard<std::mutex> lock(mu_);
    StageStats& s = stages_[tag];
    s.calls += 1;
    s.prompt_chars += prompt_chars;
    s.response_chars += response_chars;
    s.latency_ms += latency_ms;
    s.prompt_tokens += prompt_tokens;
    s.completion_tokens += completion_tokens;
}

void Telemetry::record_cache_hit(const std::string& tag, std::int64_t prompt_chars,
                                 std::int64_t response_chars) {
    std::lock_guard<std::mutex> lock(mu_);
    StageStats& s = stages_[tag];
    s.cache_hits += 1;
    s.prompt_chars += prompt_chars;
    s.response_chars += response_chars;
}

StageStats Telemetry::stage(const std::string& tag) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = stages_.find(tag);
    return it == stages_.end() ? StageStats{} : it->second;
}

StageStats Telemetry::total() const {
    std::lock_guard<std::mutex> lock(mu_);
    StageStats t;
    for (const auto& [tag, s] : stages_) {
        t.calls += s.calls;
        t.cache_hits += s.cache_hits;
        t.prompt_chars += s.prompt_chars;
        t.response_chars += s.response_chars;
        t.prompt_tokens += s.prompt_tokens;
        t.completion_tokens += s.completion_tokens;
        t.latency_ms += s.latency_ms;
    }
    return t;
}

std::vector<std::pair<std::string, StageStats>> Telemetry::stages() const {
    std::lock_guard<std::mutex> lock(mu_);
    return {stages_.begin(), stages_.end()};
}

nlohmann::ordered_json Telemetry::to_json(bool include_latency) const {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [tag, s] : stages()) {
        nlohmann::ordered_json row;
        row["calls"] = s.calls;
        row["cache_hits"] = s.cache_hits;
        row["prompt_chars"] = s.prompt_chars;
        row["response_chars"] = s.response_chars;
        if (s.prompt_tokens || s.completion_tokens) {
            row["prompt_tokens"] = s.prompt_tokens;
            row["completion_tokens"] = s.completion_tokens;
        }
        if (include_latency) row["latency_ms"] = s.latency_ms;
        out[tag] = std::move(row);
    }
    return out;
}

// ============================================================================
// ReplayBackend
// ============================================================================

ReplayBackend::ReplayBackend(std::filesystem::path root) : root_(std::move(root)) {
    if (!std::filesystem::is_directory(root_))
        throw ConfigError("replay directory does not exist: " + root_.string());
}

std::string ReplayBackend::complete(const CompletionRequest& req) {
    std::filesystem::path path =
        root_ / std::to_string(req.example_id) / (req.tag + ".txt");
    if (!std::filesystem::exists(path)) {
        throw BackendError("replay fixture missing: " + std::to_string(req.example_id) +
                           "/" + req.tag + ".txt under " + root_.string());
    }
    std::string response = read_file(path);
    telemetry_.record_call(req.tag, static_cast<std::int64_t>(req.prompt.size()),
                           static_cast<std::int64_t>(response.size()), /*latency_ms=*/0);
    return response;
}

// ============================================================================
// RateLimiter
// ============================================================================

RateLimiter::RateLimiter(int requests_per_minute)
    : per_second_(std::max(1, requests_per_minute) / 60.0),
      tokens_(static_cast<double>(std::max(1, requests_per_minute))),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    while (true) {
        double wait_s = 0.0;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto now = std::chrono::steady_clock::now();
            double elapsed = std::chrono::duration<double>(now - last_).count();
            last_ = now;
            tokens_ = std::min(tokens_ + elapsed * per_second_, per_second_ * 60.0);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait_s = (1.0 - tokens_) / per_second_;
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    }
}

// ============================================================================
// HttpBackend
// ============================================================================

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)), limiter_(options_.requests_per_minute) {
    if (options_.api_key.empty())
        throw ConfigError("provider '" + options_.name + "' has no API key configured");
    if (options_.base_url.empty())
        throw ConfigError("provider '" + options_.name + "' has no base URL");
}

std::string HttpBackend::complete(const CompletionRequest& req) {
    if (req.prompt.empty()) throw BackendError("empty prompt");

    // Split scheme://host[:port] from an optional path prefix.
    std::string url = options_.base_url;
    std::string host = url;
    std::string prefix;
    std::size_t scheme = url.find("://");
    std::size_t slash = scheme == std::string::npos ? url.find('/')
                                                    : url.find('/', scheme + 3);
    if (slash != std::string::npos) {
        host = url.substr(0, slash);
        prefix = url.substr(slash);
        if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
    std::string path = prefix + "/chat/completions";

    nlohmann::ordered_json body;
    body["model"] = options_.model;
    body["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", req.prompt}}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    std::string payload = body.dump();

    httplib::Headers headers = {{"Authorization", "Bearer " + options_.api_key}};

    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            double backoff = 0.5 * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        }
        limiter_.acquire();

        httplib::Client client(host);
        client.set_connection_timeout(std::chrono::duration<double>(options_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(options_.timeout_s));

        auto start = std::chrono::steady_clock::now();
        httplib::Result res = client.Post(path, headers, payload, "application/json");
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();

        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        if (res->status != 200) {
            throw BackendError("provider '" + options_.name + "' returned HTTP " +
                               std::to_string(res->status) + ": " + res->body);
        }

        nlohmann::ordered_json parsed =
            nlohmann::ordered_json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") ||
            parsed["choices"].empty()) {
            last_error = "malformed provider response";
            continue;
        }
        std::string text =
            parsed["choices"][0].value("message", nlohmann::ordered_json::object())
                .value("content", "");
        std::int64_t prompt_tokens = 0;
        std::int64_t completion_tokens = 0;
        if (parsed.contains("usage")) {
            prompt_tokens = parsed["usage"].value("prompt_tokens", 0);
            completion_tokens = parsed["usage"].value("completion_tokens", 0);
        }
        telemetry_.record_call(req.tag, static_cast<std::int64_t>(req.prompt.size()),
                               static_cast<std::int64_t>(text.size()), latency,
                               prompt_tokens, completion_tokens);
        return text;
    }
    throw BackendError("provider '" + options_.name + "' failed after " +
                       std::to_string(options_.max_retries + 1) + " attempts; last: " +
                       last_error);
}

// ============================================================================
// CacheBackend
// ============================================================================

CacheBackend::CacheBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string CacheBackend::cache_key(const std::string& backend_id, double temperature,
                                    const std::string& prompt) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6f", temperature);
    return sha256_hex(backend_id + "|" + temp + "|" + prompt);
}

std::string CacheBackend::complete(const CompletionRequest& req) {
    std::string key = cache_key(inner_->id(), req.temperature, req.prompt);
    std::filesystem::path path = dir_ / (key + ".json");

    if (!req.bypass_cache && std::filesystem::exists(path)) {
        nlohmann::ordered_json entry =
            nlohmann::ordered_json::parse(read_file(path), nullptr, false);
        if (!entry.is_discarded() && entry.contains("response")) {
            std::string response = entry["response"].get<std::string>();
            inner_->telemetry().record_cache_hit(
                req.tag, static_cast<std::int64_t>(req.prompt.size()),
                static_cast<std::int64_t>(response.size()));
            return response;
        }
    }

    std::string response = inner_->complete(req);

    nlohmann::ordered_json entry;
    entry["key"] = key;
    entry["backend"] = inner_->id();
    entry["temperature"] = req.temperature;
    entry["tag"] = req.tag;
    entry["created_unix"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    entry["prompt"] = req.prompt;
    entry["response"] = response;

    // Atomic publish: write a temp file, then rename over the target.
    std::lock_guard<std::mutex> lock(write_mu_);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw BackendError("cannot write cache file " + tmp.string());
        out << entry.dump(2);
    }
    std::filesystem::rename(tmp, path);
    return response;
}

// ============================================================================
// RecordingBackend
// ============================================================================

std::string RecordingBackend::complete(const CompletionRequest& req) {
    std::string response = inner_.complete(req);
    telemetry_.record_call(req.tag, static_cast<std::int64_t>(req.prompt.size()),
                           static_cast<std::int64_t>(response.size()), /*latency_ms=*/0);
    return response;
}

// ============================================================================
// complete_json
// ============================================================================

nlohmann::ordered_json complete_json(Backend& backend, CompletionRequest req) {
    std::string text = backend.complete(req);
    try {
        return parse_json_object(text);
    } catch (const JsonExtractError&) {
        req.bypass_cache = true;
        text = backend.complete(req);
        return parse_json_object(text);
    }
}

}  // namespace schemalink
