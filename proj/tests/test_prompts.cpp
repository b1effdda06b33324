#include <doctest.h>

#include "schemalink/augment.hpp"
#include "schemalink/errors.hpp"
#include "schemalink/prompts.hpp"
#include "support.hpp"

using namespace schemalink;

namespace {

DatabaseSchema sampled_financial() {
    static testsupport::TempDir tmp;
    static bool built = false;
    auto db = tmp.path() / "financial.sqlite";
    if (!built) {
        testsupport::build_financial(db);
        built = true;
    }
    DatabaseSchema schema = introspect_schema(db);
    attach_samples(schema, db, 2);
    return schema;
}

}  // namespace

TEST_CASE("templates load and carry their slots") {
    PromptTemplates t = PromptTemplates::load(testsupport::prompts_dir());
    CHECK(t.table_retrieval.find("{SCHEMA}") != std::string::npos);
    CHECK(t.table_retrieval.find("{AUGMENTED_QUESTION}") != std::string::npos);
    CHECK(t.table_retrieval.find("{HINT}") != std::string::npos);
    CHECK(t.column_retrieval.find("{SCHEMA}") != std::string::npos);
    CHECK(t.sql_generation.find("{SCHEMA}") != std::string::npos);
    CHECK(t.sql_generation.find("{EVIDENCE}") != std::string::npos);
    CHECK(t.question_decomposition.find("{QUESTION}") != std::string::npos);
    CHECK(t.keyword_extraction.find("{QUESTION}") != std::string::npos);
    CHECK(t.keyword_extraction.find("{EVIDENCE}") != std::string::npos);
}

TEST_CASE("loading from a missing directory names the file") {
    CHECK_THROWS_AS(PromptTemplates::load("/nonexistent/prompts"), ConfigError);
}

TEST_CASE("render_template replaces every occurrence and keeps json braces") {
    std::string tmpl = "A={X} B={X} C={Y} {\"json\": \"stays\"} {UNKNOWN}";
    std::string out = render_template(tmpl, {{"X", "1"}, {"Y", "2"}});
    CHECK(out == "A=1 B=1 C=2 {\"json\": \"stays\"} {UNKNOWN}");
}

TEST_CASE("schema_block lists tables, samples and keys") {
    auto schema = sampled_financial();
    auto block = schema_block(schema);

    REQUIRE(block.contains("tables"));
    auto tables = block["tables"];
    CHECK(tables.size() == 3);
    CHECK(tables["district"] ==
          nlohmann::ordered_json::array({"district_id", "A2", "A3"}));

    REQUIRE(block.contains("samples"));
    CHECK(block["samples"]["district"]["A3"][0] == "south Bohemia");

    REQUIRE(block.contains("primary_keys"));
    CHECK(block["primary_keys"]["client"] ==
          nlohmann::ordered_json::array({"client_id"}));

    REQUIRE(block.contains("foreign_keys"));
    bool found = false;
    for (const auto& fk : block["foreign_keys"]) {
        found = found || fk.get<std::string>() == "client.district_id -> district.district_id";
    }
    CHECK(found);
}

TEST_CASE("subset_block keeps subset order and casing, and filters keys") {
    auto schema = sampled_financial();
    SchemaSubset subset;
    subset.add("Disp", "type");
    subset.add("Disp", "client_id");
    subset.add("Client", "client_id");

    auto block = subset_block(subset, schema);
    auto it = block["tables"].begin();
    CHECK(it.key() == "Disp");
    CHECK(*it == nlohmann::ordered_json::array({"type", "client_id"}));
    ++it;
    CHECK(it.key() == "Client");

    // disp -> client survives since both tables are present; client ->
    // district does not since district is absent.
    bool disp_client = false;
    bool client_district = false;
    for (const auto& fk : block["foreign_keys"]) {
        auto text = fk.get<std::string>();
        disp_client = disp_client || text == "disp.client_id -> client.client_id";
        client_district = client_district ||
                          text == "client.district_id -> district.district_id";
    }
    CHECK(disp_client);
    CHECK_FALSE(client_district);
}

TEST_CASE("subset_block expands a bare table marker to all columns") {
    auto schema = sampled_financial();
    SchemaSubset subset;
    subset.add_table("district");
    auto block = subset_block(subset, schema);
    CHECK(block["tables"]["district"] ==
          nlohmann::ordered_json::array({"district_id", "A2", "A3"}));
}

TEST_CASE("augmented_question_block carries the three fields") {
    AugmentedQuestion aug;
    aug.question = "How many?";
    aug.hint = "count rows";
    aug.subquestions = {"a", "b"};
    aug.keywords = {"k1", "k2"};
    auto block = augmented_question_block(aug);
    CHECK(block["original_question"] == "How many?");
    CHECK(block["subquestions"].size() == 2);
    CHECK(block["keywords"][1] == "k2");
}
