#include "schemalink/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <sqlite3.h>
#include <json.hpp>

#include "schemalink/errors.hpp"
#include "schemalink/text.hpp"

namespace schemalink {

namespace {

using nlohmann::ordered_json;

// RAII wrapper for a read-only sqlite connection.
class Db {
public:
    explicit Db(const std::filesystem::path& path) {
        if (sqlite3_open_v2(path.string().c_str(), &db_, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
            std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
            if (db_) sqlite3_close(db_);
            db_ = nullptr;
            throw IngestError("cannot open database '" + path.string() + "': " + msg);
        }
    }
    ~Db() {
        if (db_) sqlite3_close(db_);
    }
    Db(const Db&) = delete;
    Db& operator=(const Db&) = delete;

    sqlite3* get() const { return db_; }

private:
    sqlite3* db_ = nullptr;
};

class Stmt {
public:
    Stmt(sqlite3* db, const std::string& sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
            throw IngestError(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
        }
    }
    ~Stmt() {
        if (stmt_) sqlite3_finalize(stmt_);
    }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw IngestError(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
    }
    std::string text(int col) const {
        const unsigned char* p = sqlite3_column_text(stmt_, col);
        return p ? reinterpret_cast<const char*>(p) : "";
    }
    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    int column_type(int col) const { return sqlite3_column_type(stmt_, col); }
    sqlite3_int64 int64(int col) const { return sqlite3_column_int64(stmt_, col); }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }
    sqlite3_stmt* get() const { return stmt_; }

private:
    sqlite3* db_ = nullptr;
    sqlite3_stmt* stmt_ = nullptr;
};

std::string quote_identifier(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

std::string render_real(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "0";
    return std::string(buf, end);
}

std::string require_string(const ordered_json& row, const char* field, std::size_t index) {
    auto it = row.find(field);
    if (it == row.end() || it->is_null()) {
        throw IngestError("entry " + std::to_string(index) + ": missing required field '" + field + "'");
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    throw IngestError("entry " + std::to_string(index) + ": field '" + field + "' is not a string");
}

std::string optional_string(const ordered_json& row, const char* field) {
    auto it = row.find(field);
    if (it == row.end() || !it->is_string()) return "";
    return it->get<std::string>();
}

} // namespace

const ColumnDef* TableDef::find_column(std::string_view name) const {
    std::string key = fold_case(name);
    for (const auto& c : columns) {
        if (fold_case(c.name) == key) return &c;
    }
    return nullptr;
}

const TableDef* DatabaseSchema::find_table(std::string_view name) const {
    std::string key = fold_case(name);
    for (const auto& t : tables) {
        if (fold_case(t.name) == key) return &t;
    }
    return nullptr;
}

std::size_t DatabaseSchema::column_pair_count() const {
    std::size_t n = 0;
    for (const auto& t : tables) n += t.columns.size();
    return n;
}

BenchmarkFormat benchmark_format_from_string(std::string_view s) {
    std::string f = fold_case(s);
    if (f == "bird") return BenchmarkFormat::Bird;
    if (f == "spider") return BenchmarkFormat::Spider;
    throw ConfigError("unknown benchmark format '" + std::string(s) + "' (expected bird or spider)");
}

std::string normalize_difficulty(std::string_view raw) {
    static const std::unordered_set<std::string> known = {
        "simple", "moderate", "challenging", "easy", "medium", "hard", "extra", "unknown"};
    std::string d = fold_case(trim(raw));
    if (d == "extra hard") d = "extra";
    if (known.contains(d)) return d;
    return "unknown";
}

std::vector<BenchmarkExample> load_benchmark(const std::filesystem::path& path, BenchmarkFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read benchmark file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();

    ordered_json doc;
    try {
        doc = ordered_json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestError("malformed JSON in '" + path.string() + "' at byte " + std::to_string(e.byte) +
                          ": " + e.what());
    }
    if (!doc.is_array()) throw IngestError("benchmark file '" + path.string() + "' is not a JSON array");

    std::vector<BenchmarkExample> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& row = doc[i];
        if (!row.is_object()) {
            throw IngestError("entry " + std::to_string(i) + ": not a JSON object");
        }
        BenchmarkExample ex;
        if (format == BenchmarkFormat::Bird) {
            auto qid = row.find("question_id");
            if (qid == row.end() || !qid->is_number()) {
                throw IngestError("entry " + std::to_string(i) + ": missing required field 'question_id'");
            }
            ex.question_id = qid->get<std::int64_t>();
            ex.db_id = require_string(row, "db_id", i);
            ex.question = require_string(row, "question", i);
            ex.hint = optional_string(row, "evidence");
            ex.gold_sql = require_string(row, "SQL", i);
            ex.difficulty = normalize_difficulty(optional_string(row, "difficulty"));
        } else {
            ex.question_id = static_cast<std::int64_t>(i);
            ex.db_id = require_string(row, "db_id", i);
            ex.question = require_string(row, "question", i);
            ex.gold_sql = require_string(row, "query", i);
            std::string hardness = optional_string(row, "hardness");
            ex.difficulty = hardness.empty() ? "unknown" : normalize_difficulty(hardness);
        }
        if (trim(ex.question).empty()) {
            throw IngestError("entry " + std::to_string(i) + ": empty question");
        }
        if (trim(ex.gold_sql).empty()) {
            throw IngestError("entry " + std::to_string(i) + ": empty gold SQL");
        }
        out.push_back(std::move(ex));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const BenchmarkExample& a, const BenchmarkExample& b) {
                         return a.question_id < b.question_id;
                     });
    return out;
}

DatabaseSchema introspect_schema(const std::filesystem::path& db_path) {
    Db db(db_path);
    DatabaseSchema schema;
    schema.db_id = db_path.stem().string();

    {
        Stmt tables(db.get(),
                    "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%'");
        while (tables.step()) {
            TableDef t;
            t.name = tables.text(0);
            schema.tables.push_back(std::move(t));
        }
    }
    if (schema.tables.empty()) {
        throw IngestError("database '" + db_path.string() + "' has no user tables");
    }

    for (auto& t : schema.tables) {
        std::vector<std::pair<int, std::string>> pk_order;  // pk index -> column
        Stmt cols(db.get(), "PRAGMA table_info(" + quote_identifier(t.name) + ")");
        while (cols.step()) {
            ColumnDef c;
            c.name = cols.text(1);
            c.declared_type = cols.text(2);
            int pk = static_cast<int>(cols.int64(5));
            if (pk > 0) pk_order.emplace_back(pk, c.name);
            t.columns.push_back(std::move(c));
        }
        std::sort(pk_order.begin(), pk_order.end());
        for (auto& [_, name] : pk_order) t.primary_key.push_back(std::move(name));
    }

    for (auto& t : schema.tables) {
        Stmt fks(db.get(), "PRAGMA foreign_key_list(" + quote_identifier(t.name) + ")");
        while (fks.step()) {
            ForeignKeyDef fk;
            fk.ref_table = fks.text(2);
            fk.column = fks.text(3);
            fk.ref_column = fks.is_null(4) ? "" : fks.text(4);

            const TableDef* ref = schema.find_table(fk.ref_table);
            if (ref == nullptr) {
                throw IngestError("database '" + schema.db_id + "': foreign key " + t.name + "." +
                                  fk.column + " references missing table '" + fk.ref_table + "'");
            }
            if (fk.ref_column.empty()) {
                // implicit reference to the parent's primary key
                fk.ref_column = ref->primary_key.empty() ? "" : ref->primary_key.front();
            } else if (ref->find_column(fk.ref_column) == nullptr) {
                throw IngestError("database '" + schema.db_id + "': foreign key " + t.name + "." +
                                  fk.column + " references missing column '" + fk.ref_table + "." +
                                  fk.ref_column + "'");
            }
            t.foreign_keys.push_back(std::move(fk));
        }
    }
    return schema;
}

std::vector<std::string> sample_distinct_values(const std::filesystem::path& db_path,
                                                const std::string& table, const std::string& column,
                                                int k, int max_chars) {
    if (k <= 0) return {};
    Db db(db_path);

    // confirm (table, column) exists before touching data
    {
        bool found = false;
        Stmt cols(db.get(), "PRAGMA table_info(" + quote_identifier(table) + ")");
        while (cols.step()) {
            if (fold_case(cols.text(1)) == fold_case(column)) found = true;
        }
        if (!found) {
            throw LookupError("no column '" + column + "' in table '" + table + "' of " +
                              db_path.string());
        }
    }

    std::string base = "SELECT " + quote_identifier(column) + " FROM " + quote_identifier(table) +
                       " WHERE " + quote_identifier(column) + " IS NOT NULL";
    std::unique_ptr<Stmt> rows;
    try {
        rows = std::make_unique<Stmt>(db.get(), base + " ORDER BY rowid");
    } catch (const IngestError&) {
        rows = std::make_unique<Stmt>(db.get(), base);  // WITHOUT ROWID tables
    }

    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    while (out.size() < static_cast<std::size_t>(k) && rows->step()) {
        std::string rendered;
        switch (rows->column_type(0)) {
            case SQLITE_INTEGER: rendered = std::to_string(rows->int64(0)); break;
            case SQLITE_FLOAT: rendered = render_real(rows->real(0)); break;
            case SQLITE_TEXT: rendered = rows->text(0); break;
            case SQLITE_BLOB: continue;  // useless as prompt context
            default: continue;
        }
        rendered = sanitize_value(truncate_utf8(rendered, static_cast<std::size_t>(max_chars)));
        if (rendered.empty()) continue;
        if (seen.insert(rendered).second) out.push_back(std::move(rendered));
    }
    return out;
}

void attach_samples(DatabaseSchema& schema, const std::filesystem::path& db_path, int k,
                    int max_chars) {
    for (auto& t : schema.tables) {
        for (auto& c : t.columns) {
            c.samples = sample_distinct_values(db_path, t.name, c.name, k, max_chars);
        }
    }
}

std::string sanitize_value(std::string_view text) {
    auto is_scheme_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '.' || c == '-';
    };
    auto is_alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
    auto is_alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };

    // collect [begin, end) spans of URL-shaped tokens
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = std::string_view::npos;
        // scheme://  — extend left over scheme characters to the leftmost
        // position where the scheme still starts with a letter
        if (text.compare(i, 3, "://") == 0) {
            std::size_t s = i;
            while (s > 0 && is_scheme_char(text[s - 1])) --s;
            while (s < i && !is_alpha(text[s])) ++s;
            if (s < i) start = s;
        }
        // www. at a token boundary
        if (start == std::string_view::npos && (text.compare(i, 4, "www.") == 0 || text.compare(i, 4, "WWW.") == 0)) {
            if (i == 0 || !is_alnum(text[i - 1])) start = i;
        }
        if (start != std::string_view::npos) {
            std::size_t end = i;
            while (end < text.size() && !is_space(text[end])) ++end;
            if (!spans.empty() && start <= spans.back().second) {
                spans.back().second = end;
            } else {
                spans.emplace_back(start, end);
            }
            i = end;
        } else {
            ++i;
        }
    }
    if (spans.empty()) return std::string(text);

    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    bool pending_space = false;
    auto emit = [&](std::string_view chunk) {
        if (chunk.empty()) return;
        if (pending_space && !out.empty()) out.push_back(' ');
        out.append(chunk);
        pending_space = false;
    };
    for (auto [begin, end] : spans) {
        std::size_t keep_end = begin;
        while (keep_end > pos && is_space(text[keep_end - 1])) --keep_end;  // eat space before
        emit(text.substr(pos, keep_end - pos));
        pos = end;
        while (pos < text.size() && is_space(text[pos])) ++pos;  // eat space after
        pending_space = true;
    }
    emit(text.substr(pos));
    return out;
}

std::filesystem::path resolve_db_path(const std::filesystem::path& data_root,
                                      const std::string& path_template, const std::string& db_id) {
    std::string rel = path_template;
    const std::string token = "{db_id}";
    std::size_t at;
    while ((at = rel.find(token)) != std::string::npos) {
        rel.replace(at, token.size(), db_id);
    }
    return data_root / rel;
}

} // namespace schemalink
