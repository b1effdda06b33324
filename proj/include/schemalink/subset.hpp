#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

namespace schemalink {

/// A map from table name to a set of column names. The central algebra object:
/// gold schemas, retrieved schemas, and every intermediate linking stage are
/// all SchemaSubsets.
///
/// Names are matched case-insensitively everywhere; the first-seen original
/// spelling is kept for display. Iteration follows insertion order, so a
/// subset built from an LLM response serializes in the response's key order.
class SchemaSubset {
public:
    struct Table {
        std::string name;                  // display case, first seen
        std::vector<std::string> columns;  // display case, first-seen order
    };

    /// Adds (table, column). Returns true if the pair was new.
    bool add(std::string_view table, std::string_view column);

    /// Adds a table with no columns yet (whole-table marker used between
    /// linker stages). Returns true if the table was new.
    bool add_table(std::string_view table);

    bool has_table(std::string_view table) const;
    bool has_column(std::string_view table, std::string_view column) const;

    const std::vector<Table>& tables() const { return tables_; }
    const Table* find_table(std::string_view table) const;

    std::size_t table_count() const { return tables_.size(); }
    std::size_t column_pair_count() const;
    bool empty() const { return tables_.empty(); }

    /// Element-wise union, first-seen display case wins.
    void merge(const SchemaSubset& other);

    /// True when every (table, column) of other is present here and every
    /// table of other is a table here.
    bool contains(const SchemaSubset& other) const;

    /// Removes tables that carry no columns.
    void drop_empty_tables();

    /// Case-folded (table, column) pairs, insertion order.
    std::vector<std::pair<std::string, std::string>> folded_pairs() const;

    /// Case-folded table names, insertion order.
    std::vector<std::string> folded_tables() const;

    /// {"table": ["col", ...], ...} in insertion order.
    nlohmann::ordered_json to_json() const;

    /// Deterministic rendering independent of insertion order: tables and
    /// columns sorted by their case-folded names. Two subsets with the same
    /// elements produce byte-identical canonical text.
    std::string canonical() const;

    static SchemaSubset from_json(const nlohmann::ordered_json& j);

    /// Set equality over case-folded elements; insertion order and display
    /// case are irrelevant.
    friend bool operator==(const SchemaSubset& a, const SchemaSubset& b);
    friend bool operator!=(const SchemaSubset& a, const SchemaSubset& b) { return !(a == b); }

private:
    std::vector<Table> tables_;
    std::vector<std::unordered_set<std::string>> folded_columns_;  // parallel to tables_
    std::unordered_map<std::string, std::size_t> index_;           // folded table name -> slot
};

/// Union of two subsets (Table Union + Column Aggregation).
SchemaSubset subset_union(const SchemaSubset& a, const SchemaSubset& b);

} // namespace schemalink
