// Command-line interface for the schema-linking pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "schemalink/augment.hpp"
#include "schemalink/backend.hpp"
#include "schemalink/config.hpp"
#include "schemalink/corpus.hpp"
#include "schemalink/errors.hpp"
#include "schemalink/linker.hpp"
#include "schemalink/report.hpp"
#include "schemalink/runner.hpp"
#include "schemalink/sqlscope.hpp"

namespace {

using schemalink::Config;
using schemalink::RunOptions;

struct GlobalArgs {
    std::string config_path = "config.json";
    std::string run_dir;
    std::int64_t limit = -1;
    std::vector<std::int64_t> ids;
    std::string backend;
    int workers = 0;
};

void add_global_options(CLI::App* cmd, GlobalArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the JSON config file");
    cmd->add_option("--run-dir", args.run_dir, "Directory for records and summaries");
    cmd->add_option("--limit", args.limit, "Process at most this many examples");
    cmd->add_option("--ids", args.ids, "Only these question ids")->delimiter(',');
    cmd->add_option("--backend", args.backend, "Backend name overriding the config");
    cmd->add_option("--workers", args.workers, "Worker thread count overriding the config");
}

RunOptions to_run_options(const GlobalArgs& args, std::vector<std::string> stages) {
    RunOptions opts;
    opts.stages = std::move(stages);
    opts.limit = args.limit;
    opts.ids = args.ids;
    opts.run_dir = args.run_dir;
    opts.backend_override = args.backend;
    opts.workers_override = args.workers;
    return opts;
}

int run_stages(const GlobalArgs& args, std::vector<std::string> stages, bool print_records) {
    Config config = schemalink::load_config(args.config_path);
    schemalink::RunResult result =
        schemalink::run_pipeline(config, to_run_options(args, std::move(stages)));
    if (print_records) {
        for (const auto& rec : result.records) {
            std::cout << rec.to_json().dump(2) << "\n";
        }
    }
    std::cout << schemalink::render_report(result.run_dir, schemalink::ReportFormat::kText);
    std::cout << "run dir: " << result.run_dir.string() << "\n";
    return 0;
}

int cmd_scope(const std::string& db_path, const std::string& sql, const std::string& sql_file,
              bool strict) {
    std::string text = sql;
    if (!sql_file.empty()) {
        std::ifstream in(sql_file);
        if (!in) throw schemalink::UsageError("cannot open SQL file: " + sql_file);
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    if (text.empty()) throw schemalink::UsageError("provide --sql or --sql-file");

    schemalink::DatabaseSchema schema = schemalink::introspect_schema(db_path);
    schemalink::ScopeReport report = schemalink::extract_referenced_schema(text, schema, strict);

    nlohmann::ordered_json out;
    out["subset"] = report.subset.to_json();
    nlohmann::ordered_json unresolved = nlohmann::ordered_json::array();
    for (const auto& u : report.unresolved) {
        unresolved.push_back({u.identifier, u.reason});
    }
    out["unresolved"] = std::move(unresolved);
    out["used_star"] = report.used_star;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_augment_adhoc(const GlobalArgs& args, const std::string& question,
                      const std::string& hint) {
    Config config = schemalink::load_config(args.config_path);
    std::string backend_name = args.backend.empty() ? config.backend : args.backend;
    std::filesystem::path cache_dir =
        config.cache_dir.empty() ? config.runs_dir / "adhoc-cache" : config.cache_dir;
    auto backend = schemalink::make_backend(config, backend_name, cache_dir);
    schemalink::PromptTemplates templates = schemalink::PromptTemplates::load(config.prompts_dir);

    schemalink::PipelineContext ctx;
    ctx.backend = backend.get();
    ctx.templates = &templates;
    ctx.temperature = config.temperature;
    ctx.max_tokens = config.max_tokens;

    std::vector<std::string> degradation;
    schemalink::AugmentedQuestion aug =
        schemalink::augment(question, hint, ctx, &degradation);
    nlohmann::ordered_json out;
    out["question"] = aug.question;
    out["hint"] = aug.hint;
    out["subquestions"] = aug.subquestions;
    out["keywords"] = aug.keywords;
    out["degradation"] = degradation;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bidirectional schema linking and SQL generation pipeline"};
    app.require_subcommand(1);

    GlobalArgs args;

    auto* scope = app.add_subcommand("scope", "Extract the schema subset a SQL query touches");
    std::string scope_db;
    std::string scope_sql;
    std::string scope_sql_file;
    bool scope_strict = false;
    scope->add_option("--db", scope_db, "SQLite database file")->required();
    scope->add_option("--sql", scope_sql, "SQL text");
    scope->add_option("--sql-file", scope_sql_file, "File containing SQL text");
    scope->add_flag("--strict", scope_strict, "Fail on unresolved identifiers");

    auto* augment_cmd = app.add_subcommand("augment", "Decompose questions and extract keywords");
    std::string adhoc_question;
    std::string adhoc_hint;
    augment_cmd->add_option("--question", adhoc_question, "Augment this question instead of the dataset");
    augment_cmd->add_option("--hint", adhoc_hint, "Evidence text for the ad-hoc question");
    add_global_options(augment_cmd, args);

    auto* link_cmd = app.add_subcommand("link", "Run augmentation and bidirectional linking");
    bool link_print = false;
    link_cmd->add_flag("--print-records", link_print, "Print every record as JSON");
    add_global_options(link_cmd, args);

    auto* eval_linking = app.add_subcommand("eval-linking", "Link and score against gold subsets");
    add_global_options(eval_linking, args);

    auto* generate = app.add_subcommand("generate", "Generate SQL over linked subsets");
    add_global_options(generate, args);

    auto* eval_sql = app.add_subcommand("eval-sql", "Generate SQL and check execution accuracy");
    add_global_options(eval_sql, args);

    auto* run = app.add_subcommand("run", "Run the full pipeline");
    std::vector<std::string> run_stages_arg;
    run->add_option("--stages", run_stages_arg, "Subset of stages to run")->delimiter(',');
    add_global_options(run, args);

    auto* report = app.add_subcommand("report", "Render a finished run's summary");
    std::string report_format = "text";
    report->add_option("--format", report_format, "text, json or csv");
    add_global_options(report, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (scope->parsed()) {
            return cmd_scope(scope_db, scope_sql, scope_sql_file, scope_strict);
        }
        if (augment_cmd->parsed()) {
            if (!adhoc_question.empty()) return cmd_augment_adhoc(args, adhoc_question, adhoc_hint);
            return run_stages(args, {"augment"}, false);
        }
        if (link_cmd->parsed()) return run_stages(args, {"link"}, link_print);
        if (eval_linking->parsed()) return run_stages(args, {"score"}, false);
        if (generate->parsed()) return run_stages(args, {"generate"}, false);
        if (eval_sql->parsed()) return run_stages(args, {"eval"}, false);
        if (run->parsed()) return run_stages(args, run_stages_arg, false);
        if (report->parsed()) {
            if (args.run_dir.empty()) throw schemalink::UsageError("report requires --run-dir");
            std::cout << schemalink::render_report(
                args.run_dir, schemalink::report_format_from_string(report_format));
            return 0;
        }
    } catch (const schemalink::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const schemalink::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
