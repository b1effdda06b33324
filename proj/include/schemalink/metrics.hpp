// Schema-linking evaluation numbers: recall, false-positive rate, table
// recall and schema-retention ratios, per example and macro-averaged.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schemalink/corpus.hpp"
#include "schemalink/subset.hpp"

namespace schemalink {

// Per-example comparison of a retrieved subset against the gold subset over
// (table, column) pairs.
struct LinkingScore {
    double recall = 0.0;            // tp / (tp + fn); 1 when gold is empty
    double fpr = 0.0;               // fp / (tp + fp); 0 when retrieved is empty
    double fpr_classical = 0.0;     // fp / (fp + tn)
    double table_recall = 0.0;      // over table sets
    double tables_retained = 0.0;   // retrieved tables / schema tables
    double columns_retained = 0.0;  // retrieved pairs / schema pairs
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
};

// One row of a macro-averaged summary; fractions reported as percentages.
struct AggregateRow {
    std::string group;  // "all" or a difficulty label
    std::size_t count = 0;
    double recall_pct = 0.0;
    double fpr_pct = 0.0;
    double fpr_classical_pct = 0.0;
    double table_recall_pct = 0.0;
    double tables_retained_pct = 0.0;
    double columns_retained_pct = 0.0;
};

struct LinkingSummary {
    AggregateRow overall;
    std::vector<AggregateRow> by_difficulty;  // present when difficulties given
};

// Scores one retrieved subset against gold over the full schema.  The FPR is
// the false-discovery form fp/(tp+fp): scoring the full schema as retrieved
// must land below 100%, which the classical fp/(fp+tn) form cannot do.  Both
// subsets must lie inside the schema; a stray element raises MetricError.
// Table-level numbers count a table only when it carries at least one column.
LinkingScore score_linking(const SchemaSubset& retrieved, const SchemaSubset& gold,
                           const DatabaseSchema& full);

// Unweighted mean over examples, as percentages.  When difficulties is given
// it must be parallel to scores, and per-difficulty rows are added in the
// canonical label order.  Empty scores raise MetricError.
LinkingSummary aggregate(const std::vector<LinkingScore>& scores,
                         const std::vector<std::string>* difficulties = nullptr);

// Renders a percentage with two decimals, the precision every report uses.
std::string format_percent(double pct);

}  // namespace schemalink
