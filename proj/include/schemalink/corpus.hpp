#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace schemalink {

struct BenchmarkExample {
    std::int64_t question_id = 0;
    std::string db_id;
    std::string question;
    std::string hint;      // BIRD "evidence"; empty for Spider
    std::string gold_sql;
    std::string difficulty = "unknown";  // simple|moderate|challenging|easy|medium|hard|extra|unknown
};

struct ColumnDef {
    std::string name;
    std::string declared_type;
    std::vector<std::string> samples;  // distinct sampled values, possibly empty
};

struct ForeignKeyDef {
    std::string column;      // local column
    std::string ref_table;
    std::string ref_column;
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> primary_key;
    std::vector<ForeignKeyDef> foreign_keys;

    const ColumnDef* find_column(std::string_view name) const;
};

struct DatabaseSchema {
    std::string db_id;
    std::vector<TableDef> tables;

    const TableDef* find_table(std::string_view name) const;
    std::size_t column_pair_count() const;
};

enum class BenchmarkFormat { Bird, Spider };

BenchmarkFormat benchmark_format_from_string(std::string_view s);

/// Loads a BIRD or Spider dev JSON array. Output sorted by question_id;
/// Spider entries are numbered by array index.
std::vector<BenchmarkExample> load_benchmark(const std::filesystem::path& path, BenchmarkFormat format);

/// Reads tables, columns, primary keys and foreign keys from a SQLite file.
/// Samples are left empty; attach_samples fills them.
DatabaseSchema introspect_schema(const std::filesystem::path& db_path);

/// Up to k distinct non-NULL values of (table, column), first-seen in rowid
/// order, rendered as text, truncated to max_chars and sanitized. Values that
/// sanitize to nothing are dropped; blobs are skipped.
std::vector<std::string> sample_distinct_values(const std::filesystem::path& db_path,
                                                const std::string& table, const std::string& column,
                                                int k, int max_chars = 64);

/// Fills samples for every column of the schema.
void attach_samples(DatabaseSchema& schema, const std::filesystem::path& db_path, int k,
                    int max_chars = 64);

/// Deletes every URL-shaped token (scheme://... or www.... up to whitespace)
/// and collapses the whitespace around each deletion. Idempotent.
std::string sanitize_value(std::string_view text);

/// Normalizes a dataset difficulty label to the known vocabulary, defaulting
/// to "unknown".
std::string normalize_difficulty(std::string_view raw);

/// Resolves <data_root>/<template with {db_id}> for an example's database.
std::filesystem::path resolve_db_path(const std::filesystem::path& data_root,
                                      const std::string& path_template, const std::string& db_id);

} // namespace schemalink
