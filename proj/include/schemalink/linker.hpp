// Bidirectional schema linking: a table-first retrieval path and a
// column-first retrieval path, merged by column-level union.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "schemalink/augment.hpp"
#include "schemalink/corpus.hpp"
#include "schemalink/sqlscope.hpp"
#include "schemalink/subset.hpp"

namespace schemalink {

// How the two path outputs combine.  kColumnUnion keeps the exact column
// union; kTableExpand widens every table named by the table-first path to
// its full column list before the union.
enum class MergeMode { kColumnUnion, kTableExpand };

MergeMode merge_mode_from_string(std::string_view text);
std::string_view to_string(MergeMode mode);

struct LinkOptions {
    MergeMode merge_mode = MergeMode::kColumnUnion;
    // When set, the primary and foreign key columns of every merged table
    // are added to the result.
    bool force_keys = false;
};

struct LinkingResult {
    SchemaSubset table_first;
    SchemaSubset column_first;
    SchemaSubset merged;
    // Hallucinated tables and columns removed while validating responses.
    std::vector<DroppedElement> dropped_hallucinations;
    // Human-readable notes for every fallback taken.
    std::vector<std::string> degradation_events;
};

// Table-first path: one completion proposes tables (tag "tf_tables"), the
// proposed tables are expanded to their full column lists, and a second
// completion narrows the columns (tag "tf_columns").
SchemaSubset link_table_first(const DatabaseSchema& schema, const AugmentedQuestion& aug,
                              PipelineContext& ctx,
                              std::vector<std::string>* degradation = nullptr,
                              std::vector<DroppedElement>* dropped = nullptr);

// Column-first path: one completion proposes candidate columns over the full
// schema (tag "cf_columns"), a second selects tables given those candidates
// (tag "cf_tables").  Candidate parent tables survive even when the second
// call omits them.
SchemaSubset link_column_first(const DatabaseSchema& schema, const AugmentedQuestion& aug,
                               PipelineContext& ctx,
                               std::vector<std::string>* degradation = nullptr,
                               std::vector<DroppedElement>* dropped = nullptr);

// Runs both paths (exactly four completions) and merges them.
LinkingResult link_bidirectional(const DatabaseSchema& schema, const AugmentedQuestion& aug,
                                 PipelineContext& ctx, const LinkOptions& options = {});

// All tables with all of their columns, in declaration order.
SchemaSubset full_schema_subset(const DatabaseSchema& schema);

}  // namespace schemalink
