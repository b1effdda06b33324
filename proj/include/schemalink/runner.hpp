// Dataset runner: executes the pipeline stages over a benchmark with a
// worker pool, writing resumable per-example records and a summary.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "schemalink/augment.hpp"
#include "schemalink/backend.hpp"
#include "schemalink/config.hpp"
#include "schemalink/linker.hpp"
#include "schemalink/metrics.hpp"
#include "schemalink/sqlgen.hpp"
#include "schemalink/subset.hpp"

namespace schemalink {

// The five pipeline stages in canonical order.
extern const std::vector<std::string> kAllStages;

// Everything recorded about one example.  Serialization is stable: the same
// record always renders the same JSON line.
struct RunRecord {
    std::int64_t question_id = 0;
    std::string db_id;
    std::string difficulty = "unknown";
    std::vector<std::string> stages;  // stages completed for this record
    std::optional<AugmentedQuestion> augmented;
    std::vector<std::string> augment_degradation;
    std::optional<LinkingResult> linking;
    std::optional<SchemaSubset> gold_subset;
    std::optional<LinkingScore> score;
    std::vector<GenerationOutcome> generation;
    nlohmann::ordered_json telemetry;  // per-example counters, latency-free
    std::optional<std::string> error;

    nlohmann::ordered_json to_json() const;
    static RunRecord from_json(const nlohmann::ordered_json& j);
};

struct RunOptions {
    std::vector<std::string> stages;  // empty means all five
    std::int64_t limit = -1;          // cap on examples; -1 means no cap
    std::vector<std::int64_t> ids;    // keep only these question ids
    std::filesystem::path run_dir;    // empty means runs_dir/<stamp>-<hash>
    std::string backend_override;     // empty means the config's backend
    int workers_override = 0;         // 0 means the config's worker count
};

struct RunResult {
    std::filesystem::path run_dir;
    std::vector<RunRecord> records;       // question_id order
    nlohmann::ordered_json summary;
};

// Runs the requested stages over the dataset.  Records stream to
// records.jsonl in question_id order as examples finish; an interrupted run
// resumes from the records already on disk.  Per-example failures are
// captured in the record, never aborting the run.
RunResult run_pipeline(const Config& config, const RunOptions& options = {});

// Builds the backend named by the config (or override): "replay" or a
// provider wrapped in the response cache.  Missing credentials raise
// ConfigError.
std::unique_ptr<Backend> make_backend(const Config& config, const std::string& name,
                                      const std::filesystem::path& cache_dir);

// Expands a requested stage list to include its prerequisites, in canonical
// order.  Unknown stage names raise UsageError.
std::vector<std::string> expand_stages(const std::vector<std::string>& requested);

}  // namespace schemalink
