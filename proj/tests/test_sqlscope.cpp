#include <doctest.h>

#include "schemalink/errors.hpp"
#include "schemalink/sqlscope.hpp"
#include "support.hpp"

using namespace schemalink;

namespace {

DatabaseSchema financial_schema() {
    static testsupport::TempDir tmp;
    static bool built = false;
    auto db = tmp.path() / "financial.sqlite";
    if (!built) {
        testsupport::build_financial(db);
        built = true;
    }
    return introspect_schema(db);
}

DatabaseSchema thrombosis_schema() {
    static testsupport::TempDir tmp;
    static bool built = false;
    auto db = tmp.path() / "thrombosis.sqlite";
    if (!built) {
        testsupport::build_thrombosis(db);
        built = true;
    }
    return introspect_schema(db);
}

}  // namespace

TEST_CASE("parse failure raises scope error") {
    auto schema = financial_schema();
    CHECK_THROWS_AS(extract_referenced_schema("SELECT FROM WHERE", schema), ScopeError);
    CHECK_THROWS_AS(extract_referenced_schema("", schema), ScopeError);
    CHECK_THROWS_AS(extract_referenced_schema("DELETE FROM client", schema), ScopeError);
}

TEST_CASE("unknown table is unresolved in lax mode and throws in strict mode") {
    auto schema = financial_schema();
    ScopeReport report = extract_referenced_schema("SELECT x FROM ghost", schema);
    CHECK(report.subset.empty());
    CHECK_FALSE(report.unresolved.empty());
    CHECK_THROWS_AS(extract_referenced_schema("SELECT x FROM ghost", schema, true), ScopeError);
}

TEST_CASE("unknown column is unresolved in lax mode and throws in strict mode") {
    auto schema = financial_schema();
    ScopeReport report = extract_referenced_schema("SELECT ghost_col FROM client", schema);
    CHECK(report.subset.has_table("client"));
    REQUIRE(report.unresolved.size() == 1);
    CHECK(report.unresolved[0].identifier == "ghost_col");
    CHECK_THROWS_AS(extract_referenced_schema("SELECT ghost_col FROM client", schema, true),
                    ScopeError);
}

TEST_CASE("double-quoted unresolvable identifier falls back to a string literal") {
    auto schema = financial_schema();
    // SQLite treats "OWNER" here as the string 'OWNER' since no such column
    // exists; lax mode mirrors that silently.
    ScopeReport report =
        extract_referenced_schema("SELECT client_id FROM client WHERE gender = \"OWNER\"", schema);
    CHECK(report.unresolved.empty());
    SchemaSubset expected;
    expected.add("client", "client_id");
    expected.add("client", "gender");
    CHECK(report.subset == expected);
    CHECK_THROWS_AS(
        extract_referenced_schema("SELECT client_id FROM client WHERE gender = \"OWNER\"",
                                  schema, true),
        ScopeError);
}

TEST_CASE("rowid aliases resolve silently on base tables") {
    auto schema = financial_schema();
    ScopeReport report = extract_referenced_schema("SELECT rowid FROM client", schema);
    CHECK(report.unresolved.empty());
    CHECK(report.subset.has_table("client"));
}

TEST_CASE("used_star is reported") {
    auto schema = financial_schema();
    CHECK(extract_referenced_schema("SELECT * FROM disp", schema).used_star);
    CHECK(extract_referenced_schema("SELECT d.* FROM disp d", schema).used_star);
    CHECK_FALSE(extract_referenced_schema("SELECT disp_id FROM disp", schema).used_star);
    // COUNT(*) marks the table but is not column star expansion.
    CHECK_FALSE(extract_referenced_schema("SELECT COUNT(*) FROM disp", schema).used_star);
}

TEST_CASE("ambiguous unqualified column binds to the first table and is flagged") {
    auto schema = financial_schema();
    // client_id exists in both client and disp.
    ScopeReport report = extract_referenced_schema(
        "SELECT client_id FROM client, disp", schema);
    CHECK(report.subset.has_column("client", "client_id"));
    CHECK_FALSE(report.subset.has_column("disp", "client_id"));
    REQUIRE(report.unresolved.size() == 1);
    CHECK(report.unresolved[0].identifier == "client_id");
}

TEST_CASE("subquery alias shadows the base table") {
    auto schema = financial_schema();
    ScopeReport report = extract_referenced_schema(
        "SELECT c.gender FROM (SELECT gender FROM client) AS c", schema);
    CHECK(report.unresolved.empty());
    SchemaSubset expected;
    expected.add("client", "gender");
    CHECK(report.subset == expected);
}

TEST_CASE("subset keeps the schema's declared casing") {
    auto schema = thrombosis_schema();
    ScopeReport report =
        extract_referenced_schema("select id, kct from examination", schema);
    CHECK(report.unresolved.empty());
    REQUIRE(report.subset.tables().size() == 1);
    CHECK(report.subset.tables()[0].name == "Examination");
    CHECK(report.subset.tables()[0].columns == std::vector<std::string>{"ID", "KCT"});
}

TEST_CASE("statement_has_outer_order_by distinguishes nesting") {
    auto yes = statement_has_outer_order_by;
    CHECK(yes("SELECT a FROM t ORDER BY a"));
    CHECK(yes("SELECT a FROM t UNION SELECT b FROM u ORDER BY 1"));
    CHECK_FALSE(yes("SELECT a FROM (SELECT b FROM u ORDER BY b) AS t"));
    CHECK_FALSE(yes("SELECT (SELECT b FROM u ORDER BY b LIMIT 1) FROM t"));
    CHECK_FALSE(yes("WITH c AS (SELECT b FROM u ORDER BY b) SELECT * FROM c"));
    CHECK_FALSE(yes("SELECT ROW_NUMBER() OVER (ORDER BY a) FROM t"));
    CHECK(yes("WITH c AS (SELECT b FROM u) SELECT * FROM c ORDER BY 1"));
    CHECK_FALSE(yes("SELECT a FROM t"));
}

TEST_CASE("validate_subset drops hallucinated tables and columns") {
    auto schema = financial_schema();
    SchemaSubset raw;
    raw.add("Client", "client_id");
    raw.add("client", "ghost");
    raw.add("phantom", "x");
    raw.add_table("district");
    ValidationResult v = validate_subset(raw, schema);

    SchemaSubset expected;
    expected.add("Client", "client_id");
    expected.add_table("district");
    CHECK(v.subset == expected);
    // Response casing is preserved for valid entries.
    CHECK(v.subset.tables()[0].name == "Client");

    REQUIRE(v.dropped.size() == 2);
    // Drop entries carry the table casing the subset first saw.
    CHECK(v.dropped[0].table == "Client");
    REQUIRE(v.dropped[0].column.has_value());
    CHECK(*v.dropped[0].column == "ghost");
    CHECK(v.dropped[1].table == "phantom");
    CHECK_FALSE(v.dropped[1].column.has_value());
}

TEST_CASE("validate_subset drops a table emptied by column removal") {
    auto schema = financial_schema();
    SchemaSubset raw;
    raw.add("client", "nope");
    ValidationResult v = validate_subset(raw, schema);
    CHECK(v.subset.empty());
    // The per-column entry already records why the table vanished.
    REQUIRE(v.dropped.size() == 1);
    CHECK(v.dropped[0].table == "client");
    REQUIRE(v.dropped[0].column.has_value());
    CHECK(*v.dropped[0].column == "nope");
}

TEST_CASE("in against a table emits every column of that table") {
    auto schema = financial_schema();
    ScopeReport report =
        extract_referenced_schema("SELECT client_id FROM client WHERE district_id IN district",
                                  schema);
    CHECK(report.subset.has_column("district", "district_id"));
    CHECK(report.subset.has_column("district", "A2"));
    CHECK(report.subset.has_column("district", "A3"));
}

TEST_CASE("multiple trailing semicolons parse") {
    auto schema = financial_schema();
    CHECK_NOTHROW(extract_referenced_schema("SELECT client_id FROM client;;", schema));
}

TEST_CASE("two statements are rejected") {
    auto schema = financial_schema();
    CHECK_THROWS_AS(
        extract_referenced_schema("SELECT client_id FROM client; SELECT 1", schema),
        ScopeError);
}
