#include "schemalink/linker.hpp"

#include <json.hpp>

#include "schemalink/errors.hpp"
#include "schemalink/jsonx.hpp"

namespace schemalink {

namespace {

void note(std::vector<std::string>* degradation, const std::string& message) {
    if (degradation != nullptr) degradation->push_back(message);
}

void record_drops(std::vector<DroppedElement>* dropped, const std::vector<DroppedElement>& add) {
    if (dropped == nullptr) return;
    dropped->insert(dropped->end(), add.begin(), add.end());
}

CompletionRequest make_request(PipelineContext& ctx, std::string prompt, std::string tag) {
    CompletionRequest req;
    req.prompt = std::move(prompt);
    req.temperature = ctx.temperature;
    req.max_tokens = ctx.max_tokens;
    req.tag = std::move(tag);
    req.example_id = ctx.example_id;
    return req;
}

// Issues one completion and returns the validated subset, or nullopt when
// the response is unusable or names nothing that exists.
std::optional<SchemaSubset> request_subset(PipelineContext& ctx, const std::string& tmpl,
                                           const std::string& schema_json,
                                           const AugmentedQuestion& aug, const std::string& tag,
                                           const DatabaseSchema& schema,
                                           std::vector<DroppedElement>* dropped) {
    std::string prompt = render_template(
        tmpl, {{"SCHEMA", schema_json},
               {"AUGMENTED_QUESTION", augmented_question_block(aug).dump(2)},
               {"HINT", aug.hint}});
    CompletionRequest req = make_request(ctx, std::move(prompt), tag);
    nlohmann::ordered_json obj;
    try {
        obj = complete_json(*ctx.backend, req);
    } catch (const JsonExtractError&) {
        return std::nullopt;
    }
    ValidationResult validated = validate_subset(SchemaSubset::from_json(obj), schema);
    record_drops(dropped, validated.dropped);
    if (validated.subset.empty()) return std::nullopt;
    return validated.subset;
}

// Widens every table of the subset to its full declared column list.
SchemaSubset expand_tables(const SchemaSubset& subset, const DatabaseSchema& schema) {
    SchemaSubset out;
    for (const auto& table : subset.tables()) {
        const TableDef* def = schema.find_table(table.name);
        if (def == nullptr) continue;
        for (const auto& col : def->columns) out.add(def->name, col.name);
    }
    return out;
}

}  // namespace

MergeMode merge_mode_from_string(std::string_view text) {
    if (text == "column_union") return MergeMode::kColumnUnion;
    if (text == "table_expand") return MergeMode::kTableExpand;
    throw ConfigError("unknown merge mode: " + std::string(text));
}

std::string_view to_string(MergeMode mode) {
    return mode == MergeMode::kColumnUnion ? "column_union" : "table_expand";
}

SchemaSubset full_schema_subset(const DatabaseSchema& schema) {
    SchemaSubset out;
    for (const auto& table : schema.tables) {
        out.add_table(table.name);
        for (const auto& col : table.columns) out.add(table.name, col.name);
    }
    return out;
}

SchemaSubset link_table_first(const DatabaseSchema& schema, const AugmentedQuestion& aug,
                              PipelineContext& ctx, std::vector<std::string>* degradation,
                              std::vector<DroppedElement>* dropped) {
    auto tables = request_subset(ctx, ctx.templates->table_retrieval,
                                 schema_block(schema).dump(2), aug, "tf_tables", schema, dropped);
    SchemaSubset stage1;
    if (tables) {
        stage1 = expand_tables(*tables, schema);
    } else {
        note(degradation, "tf_tables: unusable table selection, keeping every table");
        stage1 = full_schema_subset(schema);
    }

    auto columns =
        request_subset(ctx, ctx.templates->column_retrieval,
                       subset_block(stage1, schema).dump(2), aug, "tf_columns", schema, dropped);
    if (!columns) {
        note(degradation, "tf_columns: unusable column selection, keeping the table stage output");
        return stage1;
    }
    return *columns;
}

SchemaSubset link_column_first(const DatabaseSchema& schema, const AugmentedQuestion& aug,
                               PipelineContext& ctx, std::vector<std::string>* degradation,
                               std::vector<DroppedElement>* dropped) {
    auto candidates =
        request_subset(ctx, ctx.templates->column_retrieval, schema_block(schema).dump(2), aug,
                       "cf_columns", schema, dropped);
    if (!candidates) {
        note(degradation, "cf_columns: unusable column selection, keeping every column");
        candidates = full_schema_subset(schema);
    }

    auto tables = request_subset(ctx, ctx.templates->table_retrieval,
                                 subset_block(*candidates, schema).dump(2), aug, "cf_tables",
                                 schema, dropped);
    if (!tables) {
        note(degradation, "cf_tables: unusable table selection, keeping candidate parent tables");
        return *candidates;
    }

    // Tables chosen by the second call come first; candidate columns override
    // whatever column list the table call proposed for them.  Candidate
    // parents the table call dropped are appended, keys and all.
    SchemaSubset out;
    for (const auto& table : tables->tables()) {
        const SchemaSubset::Table* cand = candidates->find_table(table.name);
        if (cand != nullptr) {
            out.add_table(cand->name);
            for (const auto& col : cand->columns) out.add(cand->name, col);
        } else {
            out.add_table(table.name);
            for (const auto& col : table.columns) out.add(table.name, col);
        }
    }
    for (const auto& cand : candidates->tables()) {
        if (out.has_table(cand.name)) continue;
        out.add_table(cand.name);
        for (const auto& col : cand.columns) out.add(cand.name, col);
    }
    return out;
}

LinkingResult link_bidirectional(const DatabaseSchema& schema, const AugmentedQuestion& aug,
                                 PipelineContext& ctx, const LinkOptions& options) {
    LinkingResult result;
    result.table_first = link_table_first(schema, aug, ctx, &result.degradation_events,
                                          &result.dropped_hallucinations);
    result.column_first = link_column_first(schema, aug, ctx, &result.degradation_events,
                                            &result.dropped_hallucinations);

    SchemaSubset left = options.merge_mode == MergeMode::kTableExpand
                            ? expand_tables(result.table_first, schema)
                            : result.table_first;
    result.merged = subset_union(left, result.column_first);

    if (options.force_keys) {
        std::vector<std::string> names;
        for (const auto& table : result.merged.tables()) names.push_back(table.name);
        for (const auto& name : names) {
            const TableDef* def = schema.find_table(name);
            if (def == nullptr) continue;
            for (const auto& pk : def->primary_key) result.merged.add(def->name, pk);
            for (const auto& fk : def->foreign_keys) {
                result.merged.add(def->name, fk.column);
                if (result.merged.has_table(fk.ref_table)) {
                    result.merged.add(fk.ref_table, fk.ref_column);
                }
            }
        }
    }
    return result;
}

}  // namespace schemalink
