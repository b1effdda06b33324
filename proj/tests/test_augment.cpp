#include <doctest.h>

#include "schemalink/augment.hpp"
#include "schemalink/errors.hpp"
#include "support.hpp"

using namespace schemalink;

namespace {

class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    std::string complete(const CompletionRequest& req) override {
        if (index_ >= responses_.size()) throw BackendError("script exhausted");
        std::string response = responses_[index_++];
        telemetry_.record_call(req.tag, 1, 1, 0);
        return response;
    }
    std::string id() const override { return "scripted|test"; }

private:
    std::vector<std::string> responses_;
    std::size_t index_ = 0;
};

PromptTemplates templates() {
    return PromptTemplates::load(testsupport::prompts_dir());
}

PipelineContext make_ctx(Backend& backend, const PromptTemplates& t) {
    PipelineContext ctx;
    ctx.backend = &backend;
    ctx.templates = &t;
    return ctx;
}

}  // namespace

TEST_CASE("augment issues exactly two completions with the right tags") {
    ReplayBackend backend(testsupport::fixtures_dir() / "replay");
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    ctx.example_id = 1297;

    AugmentedQuestion aug = augment(
        "For the patients whose total cholesterol is higher than normal, how many of them "
        "have a negative measure of degree of coagulation?",
        "hint text", ctx);

    CHECK(backend.telemetry().call_count() == 2);
    CHECK(backend.telemetry().stage("decompose").calls == 1);
    CHECK(backend.telemetry().stage("keywords").calls == 1);

    REQUIRE(aug.subquestions.size() == 4);
    CHECK(aug.subquestions[0] == "What is the normal range for total cholesterol?");
    REQUIRE(aug.keywords.size() == 9);
    CHECK(aug.keywords[5] == "T-CHO");
    CHECK(aug.keywords[8] == "-");
    CHECK(aug.hint == "hint text");
}

TEST_CASE("lists are trimmed, deduplicated and free of empties") {
    ScriptedBackend backend({
        R"({"Subquestions": ["  a  ", "a", "", "b", "a"]})",
        R"({"keywords": ["x", " x ", "", "y"]})",
    });
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    AugmentedQuestion aug = augment("q", "", ctx);
    CHECK(aug.subquestions == std::vector<std::string>{"a", "b"});
    CHECK(aug.keywords == std::vector<std::string>{"x", "y"});
}

TEST_CASE("duplicate keywords from the model collapse to one") {
    ReplayBackend backend(testsupport::fixtures_dir() / "replay");
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    ctx.example_id = 291;
    AugmentedQuestion aug = augment("How many chemical compounds in the database are "
                                    "identified as carcinogenic.", "", ctx);
    // The fixture lists "carcinogenic" twice.
    CHECK(aug.keywords == std::vector<std::string>{"chemical compounds", "database",
                                                   "carcinogenic", "label", "+", "molecules"});
}

TEST_CASE("unparseable decomposition falls back to the question") {
    ScriptedBackend backend({
        "no json at all", "retry also fails",
        R"({"keywords": ["k"]})",
    });
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    std::vector<std::string> events;
    AugmentedQuestion aug = augment("What is the answer?", "", ctx, &events);
    CHECK(aug.subquestions == std::vector<std::string>{"What is the answer?"});
    CHECK(aug.keywords == std::vector<std::string>{"k"});
    REQUIRE(events.size() == 1);
    CHECK(events[0].find("decompose") != std::string::npos);
}

TEST_CASE("keyword fallback keeps question tokens longer than three characters") {
    ScriptedBackend backend({
        R"({"Subquestions": ["s"]})",
        "not json", "not json either",
    });
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    std::vector<std::string> events;
    AugmentedQuestion aug =
        augment("How many cars are red and fast?", "", ctx, &events);
    CHECK(aug.keywords == std::vector<std::string>{"many", "cars", "fast?"});
    REQUIRE(events.size() == 1);
    CHECK(events[0].find("keywords") != std::string::npos);
}

TEST_CASE("wrong-shape json uses the fallback too") {
    ScriptedBackend backend({
        R"({"Subquestions": "not a list"})",
        R"({"something_else": ["x"]})",
    });
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    std::vector<std::string> events;
    AugmentedQuestion aug = augment("Count the tall trees", "", ctx, &events);
    CHECK(aug.subquestions == std::vector<std::string>{"Count the tall trees"});
    CHECK(aug.keywords == std::vector<std::string>{"Count", "tall", "trees"});
    CHECK(events.size() == 2);
}

TEST_CASE("subquestion key matches case-insensitively") {
    ScriptedBackend backend({
        R"({"subquestions": ["lowercase key works"]})",
        R"({"KEYWORDS": ["upper key works"]})",
    });
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    AugmentedQuestion aug = augment("q", "", ctx);
    CHECK(aug.subquestions == std::vector<std::string>{"lowercase key works"});
    CHECK(aug.keywords == std::vector<std::string>{"upper key works"});
}

TEST_CASE("backend transport failure propagates") {
    ScriptedBackend backend({});  // exhausted immediately
    auto t = templates();
    PipelineContext ctx = make_ctx(backend, t);
    CHECK_THROWS_AS(augment("q", "", ctx), BackendError);
}
