// Extraction of referenced (table, column) pairs from a SQL statement.
//
// A small SQLite-dialect parser feeds a scope analyzer that resolves aliases,
// CTE names, subquery output columns, and unqualified references against a
// DatabaseSchema.  The result is the exact schema subset a statement touches,
// which serves as the ground-truth side of linking evaluation.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "schemalink/corpus.hpp"
#include "schemalink/subset.hpp"

namespace schemalink {

// One identifier the analyzer could not bind, with a human-readable reason.
struct UnresolvedRef {
    std::string identifier;
    std::string reason;
};

// Full result of scope extraction over one statement.
struct ScopeReport {
    SchemaSubset subset;
    std::vector<UnresolvedRef> unresolved;
    bool used_star = false;
};

// Element removed by validate_subset.  column is empty when the whole table
// was unknown.
struct DroppedElement {
    std::string table;
    std::optional<std::string> column;
};

struct ValidationResult {
    SchemaSubset subset;
    std::vector<DroppedElement> dropped;
};

// Parses sql as a SQLite SELECT statement (WITH/compound/subqueries included)
// and returns every (table, column) pair it references.  Aliases resolve to
// base tables, `*` and `t.*` expand against the schema, CTE names never
// appear in the subset, and pairs are reported with the schema's declared
// casing.  Tables touched only through COUNT(*) gain their primary-key
// columns so no table is reported without columns.
//
// Throws ScopeError on parse failure in both modes.  With strict true an
// identifier that cannot be bound also throws; otherwise it is recorded in
// the report and analysis continues.
ScopeReport extract_referenced_schema(const std::string& sql,
                                      const DatabaseSchema& schema,
                                      bool strict = false);

// Removes from s every table or column the schema does not contain
// (case-insensitive match).  Tables emptied by column removal are removed
// and reported with an empty column slot.
ValidationResult validate_subset(const SchemaSubset& s, const DatabaseSchema& schema);

// True when the outermost SELECT carries an ORDER BY clause.  Compound
// statements own a single statement-level ORDER BY; one inside a subquery or
// CTE body does not count.  Falls back to a token scan at nesting depth zero
// if the statement does not parse.
bool statement_has_outer_order_by(const std::string& sql);

}  // namespace schemalink
