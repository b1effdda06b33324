#include "schemalink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include "schemalink/errors.hpp"
#include "schemalink/text.hpp"

namespace schemalink {
namespace {

using PairSet = std::set<std::pair<std::string, std::string>>;

// Folded (table, column) pairs of a subset, checked against the schema.
PairSet checked_pairs(const SchemaSubset& subset, const DatabaseSchema& full,
                      const char* which) {
    PairSet pairs;
    for (const auto& [table, column] : subset.folded_pairs()) {
        const TableDef* td = full.find_table(table);
        if (!td || !td->find_column(column)) {
            throw MetricError(std::string(which) + " subset contains '" + table + "." +
                              column + "' which is not in the schema");
        }
        pairs.emplace(table, column);
    }
    return pairs;
}

std::set<std::string> table_names(const PairSet& pairs) {
    std::set<std::string> tables;
    for (const auto& [table, column] : pairs) tables.insert(table);
    return tables;
}

std::size_t intersection_size(const PairSet& a, const PairSet& b) {
    std::size_t n = 0;
    for (const auto& p : a) n += b.count(p);
    return n;
}

double safe_ratio(double num, double den, double when_empty) {
    return den == 0.0 ? when_empty : num / den;
}

AggregateRow mean_row(std::string group, const std::vector<const LinkingScore*>& scores) {
    AggregateRow row;
    row.group = std::move(group);
    row.count = scores.size();
    for (const LinkingScore* s : scores) {
        row.recall_pct += s->recall;
        row.fpr_pct += s->fpr;
        row.fpr_classical_pct += s->fpr_classical;
        row.table_recall_pct += s->table_recall;
        row.tables_retained_pct += s->tables_retained;
        row.columns_retained_pct += s->columns_retained;
    }
    const double scale = 100.0 / static_cast<double>(scores.size());
    row.recall_pct *= scale;
    row.fpr_pct *= scale;
    row.fpr_classical_pct *= scale;
    row.table_recall_pct *= scale;
    row.tables_retained_pct *= scale;
    row.columns_retained_pct *= scale;
    return row;
}

}  // namespace

LinkingScore score_linking(const SchemaSubset& retrieved, const SchemaSubset& gold,
                           const DatabaseSchema& full) {
    PairSet r = checked_pairs(retrieved, full, "retrieved");
    PairSet g = checked_pairs(gold, full, "gold");

    LinkingScore score;
    score.tp = static_cast<std::int64_t>(intersection_size(r, g));
    score.fp = static_cast<std::int64_t>(r.size()) - score.tp;
    score.fn = static_cast<std::int64_t>(g.size()) - score.tp;
    const std::int64_t full_pairs = static_cast<std::int64_t>(full.column_pair_count());
    score.tn = full_pairs - score.tp - score.fp - score.fn;

    score.recall = safe_ratio(static_cast<double>(score.tp),
                              static_cast<double>(score.tp + score.fn), 1.0);
    score.fpr = safe_ratio(static_cast<double>(score.fp),
                           static_cast<double>(score.tp + score.fp), 0.0);
    score.fpr_classical = safe_ratio(static_cast<double>(score.fp),
                                     static_cast<double>(score.fp + score.tn), 0.0);

    std::set<std::string> rt = table_names(r);
    std::set<std::string> gt = table_names(g);
    std::size_t table_tp = 0;
    for (const std::string& t : rt) table_tp += gt.count(t);
    score.table_recall =
        safe_ratio(static_cast<double>(table_tp), static_cast<double>(gt.size()), 1.0);
    score.tables_retained = safe_ratio(static_cast<double>(rt.size()),
                                       static_cast<double>(full.tables.size()), 0.0);
    score.columns_retained =
        safe_ratio(static_cast<double>(r.size()), static_cast<double>(full_pairs), 0.0);
    return score;
}

LinkingSummary aggregate(const std::vector<LinkingScore>& scores,
                         const std::vector<std::string>* difficulties) {
    if (scores.empty()) throw MetricError("aggregate over an empty score list");
    if (difficulties && difficulties->size() != scores.size())
        throw MetricError("difficulty list does not match score list");

    LinkingSummary summary;
    std::vector<const LinkingScore*> all;
    all.reserve(scores.size());
    for (const LinkingScore& s : scores) all.push_back(&s);
    summary.overall = mean_row("all", all);

    if (difficulties) {
        static const char* kOrder[] = {"simple", "moderate", "challenging", "easy",
                                       "medium", "hard",     "extra",       "unknown"};
        for (const char* label : kOrder) {
            std::vector<const LinkingScore*> group;
            for (std::size_t i = 0; i < scores.size(); ++i) {
                if (fold_case((*difficulties)[i]) == label) group.push_back(&scores[i]);
            }
            if (!group.empty()) summary.by_difficulty.push_back(mean_row(label, group));
        }
    }
    return summary;
}

std::string format_percent(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", pct);
    return buf;
}

}  // namespace schemalink
