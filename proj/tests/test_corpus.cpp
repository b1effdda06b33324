#include <doctest.h>

#include "schemalink/corpus.hpp"
#include "schemalink/errors.hpp"
#include "support.hpp"

using namespace schemalink;

TEST_CASE("load_benchmark reads the bird fixture sorted by question id") {
    auto examples = load_benchmark(testsupport::fixtures_dir() / "bird_mini.json",
                                   BenchmarkFormat::Bird);
    REQUIRE(examples.size() == 4);
    CHECK(examples[0].question_id == 130);
    CHECK(examples[1].question_id == 271);
    CHECK(examples[2].question_id == 291);
    CHECK(examples[3].question_id == 1297);
    CHECK(examples[0].db_id == "financial");
    CHECK(examples[3].difficulty == "moderate");
    CHECK(examples[3].hint.find("T-CHO") != std::string::npos);
    CHECK(examples[2].gold_sql.find("COUNT(molecule_id)") != std::string::npos);
}

TEST_CASE("load_benchmark rejects a missing file") {
    CHECK_THROWS_AS(load_benchmark("/nonexistent/dev.json", BenchmarkFormat::Bird), IngestError);
}

TEST_CASE("introspect_schema reads tables, keys and references") {
    testsupport::TempDir tmp;
    auto db = tmp.path() / "toxicology.sqlite";
    testsupport::build_toxicology(db);
    DatabaseSchema schema = introspect_schema(db);

    CHECK(schema.tables.size() == 4);
    const TableDef* connected = schema.find_table("connected");
    REQUIRE(connected != nullptr);
    CHECK(connected->primary_key == std::vector<std::string>{"atom_id", "atom_id2"});
    REQUIRE(connected->foreign_keys.size() == 3);

    const TableDef* atom = schema.find_table("ATOM");
    REQUIRE(atom != nullptr);
    CHECK(atom->name == "atom");
    REQUIRE(atom->foreign_keys.size() == 1);
    CHECK(atom->foreign_keys[0].column == "molecule_id");
    CHECK(atom->foreign_keys[0].ref_table == "molecule");
    CHECK(atom->foreign_keys[0].ref_column == "molecule_id");
    CHECK(schema.column_pair_count() == 2 + 3 + 3 + 3);
}

TEST_CASE("introspect_schema keeps quoted column names verbatim") {
    testsupport::TempDir tmp;
    auto db = tmp.path() / "thrombosis.sqlite";
    testsupport::build_thrombosis(db);
    DatabaseSchema schema = introspect_schema(db);
    const TableDef* lab = schema.find_table("Laboratory");
    REQUIRE(lab != nullptr);
    CHECK(lab->find_column("T-CHO") != nullptr);
    CHECK(lab->find_column("t-cho") != nullptr);
    const TableDef* exam = schema.find_table("Examination");
    REQUIRE(exam != nullptr);
    CHECK(exam->find_column("Examination Date") != nullptr);
}

TEST_CASE("sample_distinct_values keeps first-seen distinct order") {
    testsupport::TempDir tmp;
    auto db = tmp.path() / "fin.sqlite";
    testsupport::build_financial(db);
    auto values = sample_distinct_values(db, "district", "A3", 3);
    CHECK(values == std::vector<std::string>{"south Bohemia", "Prague"});
    auto capped = sample_distinct_values(db, "client", "client_id", 2);
    CHECK(capped == std::vector<std::string>{"10", "11"});
}

TEST_CASE("attach_samples fills every column") {
    testsupport::TempDir tmp;
    auto db = tmp.path() / "fin.sqlite";
    testsupport::build_financial(db);
    DatabaseSchema schema = introspect_schema(db);
    attach_samples(schema, db, 2);
    const TableDef* disp = schema.find_table("disp");
    REQUIRE(disp != nullptr);
    const ColumnDef* type = disp->find_column("type");
    REQUIRE(type != nullptr);
    CHECK(type->samples == std::vector<std::string>{"OWNER", "DISPONENT"});
}

TEST_CASE("sanitize_value strips urls and tidies whitespace") {
    CHECK(sanitize_value("see https://example.com/x for details") == "see for details");
    CHECK(sanitize_value("www.example.com") == "");
    CHECK(sanitize_value("a http://x www.y b") == "a b");
    CHECK(sanitize_value("plain text") == "plain text");
    // Idempotent on already-clean output.
    CHECK(sanitize_value(sanitize_value("a http://x b")) == "a b");
}

TEST_CASE("normalize_difficulty maps to the known vocabulary") {
    CHECK(normalize_difficulty("simple") == "simple");
    CHECK(normalize_difficulty("Moderate") == "moderate");
    CHECK(normalize_difficulty("CHALLENGING") == "challenging");
    CHECK(normalize_difficulty("weird") == "unknown");
    CHECK(normalize_difficulty("") == "unknown");
}

TEST_CASE("resolve_db_path substitutes the database id") {
    auto p = resolve_db_path("/data", "{db_id}/{db_id}.sqlite", "financial");
    CHECK(p == std::filesystem::path("/data/financial/financial.sqlite"));
}
