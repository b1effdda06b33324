// SQL generation over a schema subset and execution-based accuracy checking
// against a SQLite database.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "schemalink/augment.hpp"
#include "schemalink/corpus.hpp"
#include "schemalink/subset.hpp"

namespace schemalink {

// Which schema the generation prompt sees.
enum class SchemaSetting { kFull, kPerfect, kRetrieved };

SchemaSetting schema_setting_from_string(std::string_view text);
std::string_view to_string(SchemaSetting setting);

// How result rows are compared.
enum class CompareMode { kBag, kSet };

CompareMode compare_mode_from_string(std::string_view text);
std::string_view to_string(CompareMode mode);

struct GenerationOutcome {
    SchemaSetting setting = SchemaSetting::kRetrieved;
    std::string predicted_sql;
    bool executed = false;
    bool execution_match = false;
    std::optional<std::string> error_text;
    std::int64_t latency_ms = 0;
};

// One completion (tag "generate_<setting>"); renders the generation template
// with the subset in the {SCHEMA} slot and parses the "SQL" string.  Throws
// JsonExtractError when no SQL can be recovered.
std::string generate_sql(const SchemaSubset& subset, const DatabaseSchema& schema,
                         const AugmentedQuestion& aug, PipelineContext& ctx,
                         SchemaSetting setting);

struct ExecutionComparison {
    bool executed = false;
    bool match = false;
    std::optional<std::string> error_text;
    // True when the gold query carries an outer ORDER BY and row order was
    // therefore compared.
    bool order_sensitive = false;
};

// Runs both queries read-only against the database and compares result
// multisets (or sets under kSet).  Rows compare on canonical cells: numbers
// to six decimal places, NULL equal to NULL.  A gold query failure throws
// DatasetError; a predicted query failure or timeout yields executed=false
// with the error text.
ExecutionComparison execution_accuracy(const std::string& predicted_sql,
                                       const std::string& gold_sql,
                                       const std::filesystem::path& db_path,
                                       double timeout_seconds = 30.0,
                                       CompareMode mode = CompareMode::kBag);

}  // namespace schemalink
