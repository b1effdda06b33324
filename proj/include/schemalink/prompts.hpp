// Prompt template loading and rendering: placeholder substitution plus the
// JSON blocks that fill the schema and question slots.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "schemalink/corpus.hpp"
#include "schemalink/subset.hpp"

namespace schemalink {

struct AugmentedQuestion;

// The five templates of the pipeline, loaded from text files.
struct PromptTemplates {
    std::string table_retrieval;
    std::string column_retrieval;
    std::string sql_generation;
    std::string question_decomposition;
    std::string keyword_extraction;

    // Reads the five fixed file names from dir; a missing file is a
    // ConfigError naming it.
    static PromptTemplates load(const std::filesystem::path& dir);
};

// Replaces every occurrence of each {NAME} placeholder with its value.
// Braces that are not a known placeholder (JSON examples in the templates)
// pass through untouched.
std::string render_template(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& slots);

// Full-schema block for the {SCHEMA} slot: tables with column lists, sample
// values, primary keys and foreign keys, in declaration order.
nlohmann::ordered_json schema_block(const DatabaseSchema& schema);

// Same shape restricted to a subset; tables and columns follow the subset's
// insertion order and keep its display casing, while samples and key
// information come from the schema.  A subset table recorded without columns
// expands to the full column list of its schema table.
nlohmann::ordered_json subset_block(const SchemaSubset& subset, const DatabaseSchema& schema);

// {original_question, subquestions, keywords} for {AUGMENTED_QUESTION}.
nlohmann::ordered_json augmented_question_block(const AugmentedQuestion& aug);

}  // namespace schemalink
