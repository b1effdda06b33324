#include "schemalink/sqlgen.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <json.hpp>
#include <vector>

#include "schemalink/errors.hpp"
#include "schemalink/jsonx.hpp"
#include "schemalink/prompts.hpp"
#include "schemalink/sqlscope.hpp"
#include "schemalink/text.hpp"

namespace schemalink {

SchemaSetting schema_setting_from_string(std::string_view text) {
    if (text == "full") return SchemaSetting::kFull;
    if (text == "perfect") return SchemaSetting::kPerfect;
    if (text == "retrieved") return SchemaSetting::kRetrieved;
    throw ConfigError("unknown schema setting: " + std::string(text));
}

std::string_view to_string(SchemaSetting setting) {
    switch (setting) {
        case SchemaSetting::kFull: return "full";
        case SchemaSetting::kPerfect: return "perfect";
        case SchemaSetting::kRetrieved: return "retrieved";
    }
    return "retrieved";
}

CompareMode compare_mode_from_string(std::string_view text) {
    if (text == "bag") return CompareMode::kBag;
    if (text == "set") return CompareMode::kSet;
    throw ConfigError("unknown compare mode: " + std::string(text));
}

std::string_view to_string(CompareMode mode) {
    return mode == CompareMode::kBag ? "bag" : "set";
}

std::string generate_sql(const SchemaSubset& subset, const DatabaseSchema& schema,
                         const AugmentedQuestion& aug, PipelineContext& ctx,
                         SchemaSetting setting) {
    CompletionRequest req;
    req.prompt = render_template(
        ctx.templates->sql_generation,
        {{"SCHEMA", subset_block(subset, schema).dump(2)},
         {"AUGMENTED_QUESTION", augmented_question_block(aug).dump(2)},
         {"EVIDENCE", aug.hint}});
    req.temperature = ctx.temperature;
    req.max_tokens = ctx.max_tokens;
    req.tag = std::string("generate_") + std::string(to_string(setting));
    req.example_id = ctx.example_id;

    nlohmann::ordered_json obj = complete_json(*ctx.backend, req);
    for (const auto& [key, value] : obj.items()) {
        if (fold_case(key) == "sql" && value.is_string()) {
            std::string sql = trim(value.get<std::string>());
            if (!sql.empty()) return sql;
        }
    }
    throw JsonExtractError("response carries no SQL string");
}

namespace {

struct Deadline {
    std::chrono::steady_clock::time_point at;
};

extern "C" int progress_callback(void* arg) {
    auto* deadline = static_cast<Deadline*>(arg);
    return std::chrono::steady_clock::now() > deadline->at ? 1 : 0;
}

// One result row rendered as comparable cell strings.
using Row = std::vector<std::string>;

std::string canonical_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    if (std::strcmp(buf, "-0.000000") == 0) return "0.000000";
    return buf;
}

std::string canonical_cell(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return "null";
        case SQLITE_INTEGER: {
            sqlite3_int64 v = sqlite3_column_int64(stmt, col);
            const sqlite3_int64 kExact = 1LL << 53;
            if (v > kExact || v < -kExact) return "int:" + std::to_string(v);
            return canonical_number(static_cast<double>(v));
        }
        case SQLITE_FLOAT:
            return canonical_number(sqlite3_column_double(stmt, col));
        case SQLITE_BLOB: {
            const auto* bytes = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
            int n = sqlite3_column_bytes(stmt, col);
            std::string out = "blob:";
            static const char* hex = "0123456789abcdef";
            for (int i = 0; i < n; ++i) {
                out.push_back(hex[bytes[i] >> 4]);
                out.push_back(hex[bytes[i] & 0xf]);
            }
            return out;
        }
        default: {
            const auto* text = sqlite3_column_text(stmt, col);
            int n = sqlite3_column_bytes(stmt, col);
            return "txt:" + std::string(reinterpret_cast<const char*>(text),
                                        static_cast<std::size_t>(n));
        }
    }
}

struct QueryResult {
    bool ok = false;
    std::string error;
    std::vector<Row> rows;
};

QueryResult run_query(sqlite3* db, const std::string& sql, const Deadline& deadline) {
    QueryResult result;
    sqlite3_stmt* stmt = nullptr;
    int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr);
    if (rc != SQLITE_OK || stmt == nullptr) {
        result.error = sqlite3_errmsg(db);
        if (stmt != nullptr) sqlite3_finalize(stmt);
        return result;
    }
    int cols = sqlite3_column_count(stmt);
    while (true) {
        rc = sqlite3_step(stmt);
        if (rc == SQLITE_ROW) {
            Row row;
            row.reserve(static_cast<std::size_t>(cols));
            for (int c = 0; c < cols; ++c) row.push_back(canonical_cell(stmt, c));
            result.rows.push_back(std::move(row));
            continue;
        }
        if (rc == SQLITE_DONE) {
            result.ok = true;
        } else if (rc == SQLITE_INTERRUPT ||
                   std::chrono::steady_clock::now() > deadline.at) {
            result.error = "query timed out";
        } else {
            result.error = sqlite3_errmsg(db);
        }
        break;
    }
    sqlite3_finalize(stmt);
    return result;
}

bool rows_equal(std::vector<Row> predicted, std::vector<Row> gold, CompareMode mode,
                bool order_sensitive) {
    if (order_sensitive) return predicted == gold;
    if (mode == CompareMode::kSet) {
        std::sort(predicted.begin(), predicted.end());
        predicted.erase(std::unique(predicted.begin(), predicted.end()), predicted.end());
        std::sort(gold.begin(), gold.end());
        gold.erase(std::unique(gold.begin(), gold.end()), gold.end());
        return predicted == gold;
    }
    std::sort(predicted.begin(), predicted.end());
    std::sort(gold.begin(), gold.end());
    return predicted == gold;
}

}  // namespace

ExecutionComparison execution_accuracy(const std::string& predicted_sql,
                                       const std::string& gold_sql,
                                       const std::filesystem::path& db_path,
                                       double timeout_seconds, CompareMode mode) {
    ExecutionComparison cmp;

    sqlite3* db = nullptr;
    int rc = sqlite3_open_v2(db_path.string().c_str(), &db, SQLITE_OPEN_READONLY, nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = db != nullptr ? sqlite3_errmsg(db) : "cannot open database";
        if (db != nullptr) sqlite3_close(db);
        throw DatasetError("cannot open database " + db_path.string() + ": " + msg);
    }

    Deadline deadline{std::chrono::steady_clock::now() +
                      std::chrono::milliseconds(static_cast<std::int64_t>(timeout_seconds * 1000.0))};
    sqlite3_progress_handler(db, 5000, progress_callback, &deadline);

    QueryResult gold = run_query(db, gold_sql, deadline);
    if (!gold.ok) {
        sqlite3_close(db);
        throw DatasetError("gold query failed on " + db_path.string() + ": " + gold.error);
    }

    deadline.at = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(static_cast<std::int64_t>(timeout_seconds * 1000.0));
    QueryResult predicted = run_query(db, predicted_sql, deadline);
    sqlite3_close(db);
    if (!predicted.ok) {
        cmp.error_text = predicted.error;
        return cmp;
    }

    cmp.executed = true;
    cmp.order_sensitive = statement_has_outer_order_by(gold_sql);
    cmp.match = rows_equal(std::move(predicted.rows), std::move(gold.rows), mode,
                           cmp.order_sensitive);
    return cmp;
}

}  // namespace schemalink
