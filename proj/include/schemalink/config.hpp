// Run configuration: JSON file, strict key checking, environment overrides.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace schemalink {

struct ProviderConfig {
    std::string name;
    std::string base_url;
    std::string model;
    // Environment variable holding the API key; empty means
    // SCHEMALINK_API_KEY_<NAME>.
    std::string api_key_env;
    int requests_per_minute = 60;
    int max_retries = 3;
    double timeout_seconds = 120.0;
};

struct Config {
    std::filesystem::path dataset_path;
    std::string benchmark_format = "bird";
    std::filesystem::path data_root;
    std::string db_path_template = "{db_id}/{db_id}.sqlite";
    std::filesystem::path prompts_dir = "prompts";
    std::filesystem::path runs_dir = "runs";

    // "replay" or the name of a configured provider.
    std::string backend = "replay";
    std::filesystem::path replay_dir;
    std::filesystem::path cache_dir;
    std::vector<ProviderConfig> providers;

    double temperature = 0.3;
    int max_tokens = 4096;
    int workers = 4;
    int samples_per_column = 3;
    int sample_max_chars = 64;
    double sql_timeout_seconds = 30.0;
    std::string merge_mode = "column_union";
    bool force_keys = false;
    std::string compare_mode = "bag";
    std::vector<std::string> generation_settings = {"retrieved"};
};

// Parses the JSON config.  Unknown keys raise ConfigError.  The
// SCHEMALINK_DATA_ROOT environment variable overrides data_root.  Relative
// paths resolve against the config file's directory.
Config load_config(const std::filesystem::path& path);

// Applies the same environment overrides and validation to an in-memory
// config.  load_config calls this; tests building configs by hand may too.
void finalize_config(Config& config);

// Stable short fingerprint of every setting that affects results.
std::string config_hash(const Config& config);

}  // namespace schemalink
