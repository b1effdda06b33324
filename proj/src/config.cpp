#include "schemalink/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>

#include "schemalink/errors.hpp"
#include "schemalink/linker.hpp"
#include "schemalink/sqlgen.hpp"
#include "schemalink/text.hpp"

namespace schemalink {

namespace {

using Json = nlohmann::ordered_json;

void check_keys(const Json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (known.count(key) == 0) {
            throw ConfigError("unknown " + where + " key: " + key);
        }
    }
}

template <typename T>
void read_field(const Json& obj, const char* key, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("config key has the wrong type: ") + key);
    }
}

void read_path(const Json& obj, const char* key, std::filesystem::path& out) {
    std::string text = out.string();
    read_field(obj, key, text);
    out = text;
}

ProviderConfig parse_provider(const Json& obj) {
    if (!obj.is_object()) throw ConfigError("provider entries must be objects");
    check_keys(obj,
               {"name", "base_url", "model", "api_key_env", "requests_per_minute",
                "max_retries", "timeout_seconds"},
               "provider");
    ProviderConfig p;
    read_field(obj, "name", p.name);
    read_field(obj, "base_url", p.base_url);
    read_field(obj, "model", p.model);
    read_field(obj, "api_key_env", p.api_key_env);
    read_field(obj, "requests_per_minute", p.requests_per_minute);
    read_field(obj, "max_retries", p.max_retries);
    read_field(obj, "timeout_seconds", p.timeout_seconds);
    if (p.name.empty()) throw ConfigError("provider name must not be empty");
    return p;
}

void resolve_relative(std::filesystem::path& path, const std::filesystem::path& base) {
    if (!path.empty() && path.is_relative()) path = base / path;
}

}  // namespace

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    Json obj;
    try {
        obj = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!obj.is_object()) throw ConfigError("config root must be a JSON object");

    check_keys(obj,
               {"dataset_path", "benchmark_format", "data_root", "db_path_template",
                "prompts_dir", "runs_dir", "backend", "replay_dir", "cache_dir", "providers",
                "temperature", "max_tokens", "workers", "samples_per_column",
                "sample_max_chars", "sql_timeout_seconds", "merge_mode", "force_keys",
                "compare_mode", "generation_settings"},
               "config");

    Config cfg;
    read_path(obj, "dataset_path", cfg.dataset_path);
    read_field(obj, "benchmark_format", cfg.benchmark_format);
    read_path(obj, "data_root", cfg.data_root);
    read_field(obj, "db_path_template", cfg.db_path_template);
    read_path(obj, "prompts_dir", cfg.prompts_dir);
    read_path(obj, "runs_dir", cfg.runs_dir);
    read_field(obj, "backend", cfg.backend);
    read_path(obj, "replay_dir", cfg.replay_dir);
    read_path(obj, "cache_dir", cfg.cache_dir);
    read_field(obj, "temperature", cfg.temperature);
    read_field(obj, "max_tokens", cfg.max_tokens);
    read_field(obj, "workers", cfg.workers);
    read_field(obj, "samples_per_column", cfg.samples_per_column);
    read_field(obj, "sample_max_chars", cfg.sample_max_chars);
    read_field(obj, "sql_timeout_seconds", cfg.sql_timeout_seconds);
    read_field(obj, "merge_mode", cfg.merge_mode);
    read_field(obj, "force_keys", cfg.force_keys);
    read_field(obj, "compare_mode", cfg.compare_mode);
    read_field(obj, "generation_settings", cfg.generation_settings);

    if (auto it = obj.find("providers"); it != obj.end()) {
        if (!it->is_array()) throw ConfigError("providers must be an array");
        for (const auto& entry : *it) cfg.providers.push_back(parse_provider(entry));
    }

    std::filesystem::path base = path.parent_path();
    resolve_relative(cfg.dataset_path, base);
    resolve_relative(cfg.data_root, base);
    resolve_relative(cfg.prompts_dir, base);
    resolve_relative(cfg.runs_dir, base);
    resolve_relative(cfg.replay_dir, base);
    resolve_relative(cfg.cache_dir, base);

    finalize_config(cfg);
    return cfg;
}

void finalize_config(Config& config) {
    if (const char* root = std::getenv("SCHEMALINK_DATA_ROOT"); root != nullptr && *root != '\0') {
        config.data_root = root;
    }

    benchmark_format_from_string(config.benchmark_format);
    merge_mode_from_string(config.merge_mode);
    compare_mode_from_string(config.compare_mode);
    for (const auto& setting : config.generation_settings) {
        schema_setting_from_string(setting);
    }
    if (config.workers < 1) throw ConfigError("workers must be at least 1");
    if (config.samples_per_column < 0) throw ConfigError("samples_per_column must not be negative");
    if (config.temperature < 0.0) throw ConfigError("temperature must not be negative");
    if (config.sql_timeout_seconds <= 0.0) throw ConfigError("sql_timeout_seconds must be positive");

    if (config.backend != "replay") {
        bool found = false;
        for (const auto& p : config.providers) found = found || p.name == config.backend;
        if (!found) throw ConfigError("backend names no configured provider: " + config.backend);
    }
}

std::string config_hash(const Config& config) {
    nlohmann::json j;
    j["dataset_path"] = config.dataset_path.string();
    j["benchmark_format"] = config.benchmark_format;
    j["data_root"] = config.data_root.string();
    j["db_path_template"] = config.db_path_template;
    j["prompts_dir"] = config.prompts_dir.string();
    j["backend"] = config.backend;
    j["replay_dir"] = config.replay_dir.string();
    j["temperature"] = config.temperature;
    j["max_tokens"] = config.max_tokens;
    j["samples_per_column"] = config.samples_per_column;
    j["sample_max_chars"] = config.sample_max_chars;
    j["sql_timeout_seconds"] = config.sql_timeout_seconds;
    j["merge_mode"] = config.merge_mode;
    j["force_keys"] = config.force_keys;
    j["compare_mode"] = config.compare_mode;
    j["generation_settings"] = config.generation_settings;
    for (const auto& p : config.providers) {
        if (p.name != config.backend) continue;
        j["model"] = p.model;
        j["base_url"] = p.base_url;
    }
    return sha256_hex(j.dump()).substr(0, 12);
}

}  // namespace schemalink
