#include "schemalink/prompts.hpp"

#include <fstream>
#include <sstream>

#include "schemalink/augment.hpp"
#include "schemalink/errors.hpp"

namespace schemalink {
namespace {

std::string read_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("prompt template not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Sample values and key metadata for one table, restricted to cols.
void append_table_details(nlohmann::ordered_json& samples, nlohmann::ordered_json& pks,
                          const TableDef& td, const std::string& display_name,
                          const std::vector<const ColumnDef*>& cols) {
    nlohmann::ordered_json table_samples = nlohmann::ordered_json::object();
    for (const ColumnDef* col : cols) {
        if (!col->samples.empty()) table_samples[col->name] = col->samples;
    }
    if (!table_samples.empty()) samples[display_name] = std::move(table_samples);
    if (!td.primary_key.empty()) pks[display_name] = td.primary_key;
}

}  // namespace

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    PromptTemplates t;
    t.table_retrieval = read_template(dir / "table_retrieval.txt");
    t.column_retrieval = read_template(dir / "column_retrieval.txt");
    t.sql_generation = read_template(dir / "sql_generation.txt");
    t.question_decomposition = read_template(dir / "question_decomposition.txt");
    t.keyword_extraction = read_template(dir / "keyword_extraction.txt");
    return t;
}

std::string render_template(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& slots) {
    std::string out(tmpl);
    for (const auto& [name, value] : slots) {
        std::string placeholder = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

nlohmann::ordered_json schema_block(const DatabaseSchema& schema) {
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    nlohmann::ordered_json samples = nlohmann::ordered_json::object();
    nlohmann::ordered_json pks = nlohmann::ordered_json::object();
    nlohmann::ordered_json fks = nlohmann::ordered_json::array();
    for (const TableDef& td : schema.tables) {
        std::vector<std::string> names;
        std::vector<const ColumnDef*> cols;
        for (const ColumnDef& c : td.columns) {
            names.push_back(c.name);
            cols.push_back(&c);
        }
        tables[td.name] = names;
        append_table_details(samples, pks, td, td.name, cols);
        for (const ForeignKeyDef& fk : td.foreign_keys) {
            fks.push_back(td.name + "." + fk.column + " -> " + fk.ref_table + "." +
                          fk.ref_column);
        }
    }
    nlohmann::ordered_json out;
    out["tables"] = std::move(tables);
    if (!samples.empty()) out["samples"] = std::move(samples);
    if (!pks.empty()) out["primary_keys"] = std::move(pks);
    if (!fks.empty()) out["foreign_keys"] = std::move(fks);
    return out;
}

nlohmann::ordered_json subset_block(const SchemaSubset& subset,
                                    const DatabaseSchema& schema) {
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    nlohmann::ordered_json samples = nlohmann::ordered_json::object();
    nlohmann::ordered_json pks = nlohmann::ordered_json::object();
    nlohmann::ordered_json fks = nlohmann::ordered_json::array();

    for (const SchemaSubset::Table& t : subset.tables()) {
        const TableDef* td = schema.find_table(t.name);
        if (!td) continue;  // callers validate first; skip defensively
        std::vector<std::string> names;
        std::vector<const ColumnDef*> cols;
        if (t.columns.empty()) {
            for (const ColumnDef& c : td->columns) {
                names.push_back(c.name);
                cols.push_back(&c);
            }
        } else {
            for (const std::string& col : t.columns) {
                const ColumnDef* def = td->find_column(col);
                if (!def) continue;
                names.push_back(col);  // keep the subset's display casing
                cols.push_back(def);
            }
        }
        tables[t.name] = names;
        append_table_details(samples, pks, *td, t.name, cols);
    }
    // Foreign keys whose both endpoints are in the subset.
    for (const SchemaSubset::Table& t : subset.tables()) {
        const TableDef* td = schema.find_table(t.name);
        if (!td) continue;
        for (const ForeignKeyDef& fk : td->foreign_keys) {
            if (subset.has_table(fk.ref_table)) {
                fks.push_back(td->name + "." + fk.column + " -> " + fk.ref_table + "." +
                              fk.ref_column);
            }
        }
    }

    nlohmann::ordered_json out;
    out["tables"] = std::move(tables);
    if (!samples.empty()) out["samples"] = std::move(samples);
    if (!pks.empty()) out["primary_keys"] = std::move(pks);
    if (!fks.empty()) out["foreign_keys"] = std::move(fks);
    return out;
}

nlohmann::ordered_json augmented_question_block(const AugmentedQuestion& aug) {
    nlohmann::ordered_json out;
    out["original_question"] = aug.question;
    out["subquestions"] = aug.subquestions;
    out["keywords"] = aug.keywords;
    return out;
}

}  // namespace schemalink
