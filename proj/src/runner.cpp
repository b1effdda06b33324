#include "schemalink/runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "schemalink/errors.hpp"
#include "schemalink/sqlscope.hpp"
#include "schemalink/text.hpp"

namespace schemalink {

const std::vector<std::string> kAllStages = {"augment", "link", "score", "generate", "eval"};

namespace {

using Json = nlohmann::ordered_json;

// ============================================================
// Record serialization
// ============================================================

Json aug_to_json(const AugmentedQuestion& a) {
    Json j;
    j["question"] = a.question;
    j["hint"] = a.hint;
    j["subquestions"] = a.subquestions;
    j["keywords"] = a.keywords;
    return j;
}

AugmentedQuestion aug_from_json(const Json& j) {
    AugmentedQuestion a;
    a.question = j.value("question", "");
    a.hint = j.value("hint", "");
    if (j.contains("subquestions")) a.subquestions = j["subquestions"].get<std::vector<std::string>>();
    if (j.contains("keywords")) a.keywords = j["keywords"].get<std::vector<std::string>>();
    return a;
}

Json dropped_to_json(const std::vector<DroppedElement>& dropped) {
    Json arr = Json::array();
    for (const auto& d : dropped) {
        Json pair = Json::array();
        pair.push_back(d.table);
        if (d.column) {
            pair.push_back(*d.column);
        } else {
            pair.push_back(nullptr);
        }
        arr.push_back(std::move(pair));
    }
    return arr;
}

std::vector<DroppedElement> dropped_from_json(const Json& arr) {
    std::vector<DroppedElement> out;
    for (const auto& pair : arr) {
        DroppedElement d;
        d.table = pair.at(0).get<std::string>();
        if (!pair.at(1).is_null()) d.column = pair.at(1).get<std::string>();
        out.push_back(std::move(d));
    }
    return out;
}

Json linking_to_json(const LinkingResult& r) {
    Json j;
    j["table_first"] = r.table_first.to_json();
    j["column_first"] = r.column_first.to_json();
    j["merged"] = r.merged.to_json();
    j["dropped_hallucinations"] = dropped_to_json(r.dropped_hallucinations);
    j["degradation_events"] = r.degradation_events;
    return j;
}

LinkingResult linking_from_json(const Json& j) {
    LinkingResult r;
    r.table_first = SchemaSubset::from_json(j.at("table_first"));
    r.column_first = SchemaSubset::from_json(j.at("column_first"));
    r.merged = SchemaSubset::from_json(j.at("merged"));
    if (j.contains("dropped_hallucinations")) {
        r.dropped_hallucinations = dropped_from_json(j["dropped_hallucinations"]);
    }
    if (j.contains("degradation_events")) {
        r.degradation_events = j["degradation_events"].get<std::vector<std::string>>();
    }
    return r;
}

Json score_to_json(const LinkingScore& s) {
    Json j;
    j["recall"] = s.recall;
    j["fpr"] = s.fpr;
    j["fpr_classical"] = s.fpr_classical;
    j["table_recall"] = s.table_recall;
    j["tables_retained"] = s.tables_retained;
    j["columns_retained"] = s.columns_retained;
    j["tp"] = s.tp;
    j["fp"] = s.fp;
    j["fn"] = s.fn;
    j["tn"] = s.tn;
    return j;
}

LinkingScore score_from_json(const Json& j) {
    LinkingScore s;
    s.recall = j.at("recall").get<double>();
    s.fpr = j.at("fpr").get<double>();
    s.fpr_classical = j.at("fpr_classical").get<double>();
    s.table_recall = j.at("table_recall").get<double>();
    s.tables_retained = j.at("tables_retained").get<double>();
    s.columns_retained = j.at("columns_retained").get<double>();
    s.tp = j.at("tp").get<std::int64_t>();
    s.fp = j.at("fp").get<std::int64_t>();
    s.fn = j.at("fn").get<std::int64_t>();
    s.tn = j.at("tn").get<std::int64_t>();
    return s;
}

Json outcome_to_json(const GenerationOutcome& g) {
    Json j;
    j["setting"] = std::string(to_string(g.setting));
    j["predicted_sql"] = g.predicted_sql;
    j["executed"] = g.executed;
    j["execution_match"] = g.execution_match;
    if (g.error_text) j["error_text"] = *g.error_text;
    return j;
}

GenerationOutcome outcome_from_json(const Json& j) {
    GenerationOutcome g;
    g.setting = schema_setting_from_string(j.at("setting").get<std::string>());
    g.predicted_sql = j.at("predicted_sql").get<std::string>();
    g.executed = j.at("executed").get<bool>();
    g.execution_match = j.at("execution_match").get<bool>();
    if (j.contains("error_text")) g.error_text = j["error_text"].get<std::string>();
    return g;
}

}  // namespace

Json RunRecord::to_json() const {
    Json j;
    j["question_id"] = question_id;
    j["db_id"] = db_id;
    j["difficulty"] = difficulty;
    j["stages"] = stages;
    if (augmented) j["augmented"] = aug_to_json(*augmented);
    if (!augment_degradation.empty()) j["augment_degradation"] = augment_degradation;
    if (linking) j["linking"] = linking_to_json(*linking);
    if (gold_subset) j["gold_subset"] = gold_subset->to_json();
    if (score) j["score"] = score_to_json(*score);
    if (!generation.empty()) {
        Json arr = Json::array();
        for (const auto& g : generation) arr.push_back(outcome_to_json(g));
        j["generation"] = std::move(arr);
    }
    if (!telemetry.is_null()) j["telemetry"] = telemetry;
    if (error) j["error"] = *error;
    return j;
}

RunRecord RunRecord::from_json(const Json& j) {
    RunRecord r;
    r.question_id = j.at("question_id").get<std::int64_t>();
    r.db_id = j.at("db_id").get<std::string>();
    r.difficulty = j.value("difficulty", "unknown");
    if (j.contains("stages")) r.stages = j["stages"].get<std::vector<std::string>>();
    if (j.contains("augmented")) r.augmented = aug_from_json(j["augmented"]);
    if (j.contains("augment_degradation")) {
        r.augment_degradation = j["augment_degradation"].get<std::vector<std::string>>();
    }
    if (j.contains("linking")) r.linking = linking_from_json(j["linking"]);
    if (j.contains("gold_subset")) r.gold_subset = SchemaSubset::from_json(j["gold_subset"]);
    if (j.contains("score")) r.score = score_from_json(j["score"]);
    if (j.contains("generation")) {
        for (const auto& g : j["generation"]) r.generation.push_back(outcome_from_json(g));
    }
    if (j.contains("telemetry")) r.telemetry = j["telemetry"];
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    return r;
}

// ============================================================
// Stage selection and backend construction
// ============================================================

std::vector<std::string> expand_stages(const std::vector<std::string>& requested) {
    if (requested.empty()) return kAllStages;
    std::set<std::string> want;
    for (const auto& stage : requested) {
        if (std::find(kAllStages.begin(), kAllStages.end(), stage) == kAllStages.end()) {
            throw UsageError("unknown stage: " + stage);
        }
        want.insert(stage);
    }
    if (want.count("eval")) want.insert("generate");
    if (want.count("generate")) want.insert("link");
    if (want.count("score")) want.insert("link");
    if (want.count("link")) want.insert("augment");
    std::vector<std::string> out;
    for (const auto& stage : kAllStages) {
        if (want.count(stage)) out.push_back(stage);
    }
    return out;
}

std::unique_ptr<Backend> make_backend(const Config& config, const std::string& name,
                                      const std::filesystem::path& cache_dir) {
    if (name == "replay") {
        if (config.replay_dir.empty()) {
            throw ConfigError("replay backend requires replay_dir");
        }
        return std::make_unique<ReplayBackend>(config.replay_dir);
    }
    for (const auto& p : config.providers) {
        if (p.name != name) continue;
        std::string env = p.api_key_env;
        if (env.empty()) {
            env = "SCHEMALINK_API_KEY_";
            for (char c : p.name) {
                env.push_back(std::isalnum(static_cast<unsigned char>(c))
                                  ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                  : '_');
            }
        }
        const char* key = std::getenv(env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("provider " + p.name + " requires the " + env +
                              " environment variable");
        }
        HttpBackendOptions opts;
        opts.name = p.name;
        opts.base_url = p.base_url;
        opts.model = p.model;
        opts.api_key = key;
        opts.requests_per_minute = p.requests_per_minute;
        opts.max_retries = p.max_retries;
        opts.timeout_s = p.timeout_seconds;
        auto http = std::make_shared<HttpBackend>(std::move(opts));
        return std::make_unique<CacheBackend>(std::move(http), cache_dir);
    }
    throw ConfigError("backend names no configured provider: " + name);
}

// ============================================================
// Pipeline execution
// ============================================================

namespace {

struct DbEntry {
    DatabaseSchema schema;
    std::filesystem::path path;
    std::string error;  // non-empty when the database could not be loaded
};

bool has_stage(const std::vector<std::string>& stages, const char* name) {
    return std::find(stages.begin(), stages.end(), name) != stages.end();
}

std::string utc_stamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

Json config_to_json(const Config& c) {
    Json j;
    j["dataset_path"] = c.dataset_path.string();
    j["benchmark_format"] = c.benchmark_format;
    j["data_root"] = c.data_root.string();
    j["db_path_template"] = c.db_path_template;
    j["prompts_dir"] = c.prompts_dir.string();
    j["runs_dir"] = c.runs_dir.string();
    j["backend"] = c.backend;
    j["replay_dir"] = c.replay_dir.string();
    j["cache_dir"] = c.cache_dir.string();
    j["temperature"] = c.temperature;
    j["max_tokens"] = c.max_tokens;
    j["workers"] = c.workers;
    j["samples_per_column"] = c.samples_per_column;
    j["sample_max_chars"] = c.sample_max_chars;
    j["sql_timeout_seconds"] = c.sql_timeout_seconds;
    j["merge_mode"] = c.merge_mode;
    j["force_keys"] = c.force_keys;
    j["compare_mode"] = c.compare_mode;
    j["generation_settings"] = c.generation_settings;
    return j;
}

// Processes one example through the requested stages; every failure lands in
// the record's error field.
RunRecord process_example(const BenchmarkExample& ex, const std::vector<std::string>& stages,
                          const Config& config, const DbEntry* db, Backend& shared,
                          const PromptTemplates& templates) {
    RunRecord rec;
    rec.question_id = ex.question_id;
    rec.db_id = ex.db_id;
    rec.difficulty = ex.difficulty;
    rec.stages = stages;

    RecordingBackend counting(shared);
    PipelineContext ctx;
    ctx.backend = &counting;
    ctx.templates = &templates;
    ctx.temperature = config.temperature;
    ctx.max_tokens = config.max_tokens;
    ctx.example_id = ex.question_id;

    bool needs_schema = stages.size() > 1 || !has_stage(stages, "augment");
    try {
        if (needs_schema) {
            if (db == nullptr) throw DatasetError("no database entry for " + ex.db_id);
            if (!db->error.empty()) throw DatasetError(db->error);
        }

        if (has_stage(stages, "augment")) {
            rec.augmented = augment(ex.question, ex.hint, ctx, &rec.augment_degradation);
        }

        LinkOptions link_opts;
        link_opts.merge_mode = merge_mode_from_string(config.merge_mode);
        link_opts.force_keys = config.force_keys;
        if (has_stage(stages, "link")) {
            rec.linking = link_bidirectional(db->schema, *rec.augmented, ctx, link_opts);
        }

        bool wants_perfect = false;
        for (const auto& s : config.generation_settings) wants_perfect |= s == "perfect";
        bool needs_gold = has_stage(stages, "score") ||
                          (has_stage(stages, "generate") && wants_perfect);
        if (needs_gold) {
            rec.gold_subset = extract_referenced_schema(ex.gold_sql, db->schema).subset;
        }

        if (has_stage(stages, "score")) {
            LinkingScore merged = score_linking(rec.linking->merged, *rec.gold_subset, db->schema);
            LinkingScore tf = score_linking(rec.linking->table_first, *rec.gold_subset, db->schema);
            LinkingScore cf = score_linking(rec.linking->column_first, *rec.gold_subset, db->schema);
            if (merged.recall + 1e-12 < tf.recall || merged.recall + 1e-12 < cf.recall) {
                throw MetricError("merged subset lowered recall against a single path");
            }
            rec.score = merged;
        }

        if (has_stage(stages, "generate")) {
            for (const auto& name : config.generation_settings) {
                SchemaSetting setting = schema_setting_from_string(name);
                GenerationOutcome outcome;
                outcome.setting = setting;
                SchemaSubset subset;
                switch (setting) {
                    case SchemaSetting::kFull: subset = full_schema_subset(db->schema); break;
                    case SchemaSetting::kPerfect: subset = *rec.gold_subset; break;
                    case SchemaSetting::kRetrieved: subset = rec.linking->merged; break;
                }
                try {
                    outcome.predicted_sql =
                        generate_sql(subset, db->schema, *rec.augmented, ctx, setting);
                } catch (const JsonExtractError& e) {
                    outcome.error_text = std::string("generation failed: ") + e.what();
                }
                rec.generation.push_back(std::move(outcome));
            }
        }

        if (has_stage(stages, "eval")) {
            for (auto& outcome : rec.generation) {
                if (outcome.predicted_sql.empty()) continue;
                ExecutionComparison cmp = execution_accuracy(
                    outcome.predicted_sql, ex.gold_sql, db->path, config.sql_timeout_seconds,
                    compare_mode_from_string(config.compare_mode));
                outcome.executed = cmp.executed;
                outcome.execution_match = cmp.match;
                outcome.error_text = cmp.error_text;
            }
        }
    } catch (const DatasetError& e) {
        std::fprintf(stderr, "[schemalink] example %lld: %s\n",
                     static_cast<long long>(ex.question_id), e.what());
        rec.error = e.what();
    } catch (const std::exception& e) {
        rec.error = e.what();
    }

    rec.telemetry = counting.telemetry().to_json(false);
    return rec;
}

// Sums per-stage counters across record telemetry objects.
Json aggregate_telemetry(const std::vector<RunRecord>& records) {
    std::map<std::string, std::array<std::int64_t, 6>> sums;
    for (const auto& rec : records) {
        if (!rec.telemetry.is_object()) continue;
        for (const auto& [tag, row] : rec.telemetry.items()) {
            auto& s = sums[tag];
            s[0] += row.value("calls", 0);
            s[1] += row.value("cache_hits", 0);
            s[2] += row.value("prompt_chars", 0);
            s[3] += row.value("response_chars", 0);
            s[4] += row.value("prompt_tokens", 0);
            s[5] += row.value("completion_tokens", 0);
        }
    }
    Json out = Json::object();
    for (const auto& [tag, s] : sums) {
        Json row;
        row["calls"] = s[0];
        row["cache_hits"] = s[1];
        row["prompt_chars"] = s[2];
        row["response_chars"] = s[3];
        if (s[4] || s[5]) {
            row["prompt_tokens"] = s[4];
            row["completion_tokens"] = s[5];
        }
        out[tag] = std::move(row);
    }
    return out;
}

Json linking_summary_json(const LinkingSummary& summary) {
    auto row_json = [](const AggregateRow& r) {
        Json j;
        j["group"] = r.group;
        j["count"] = r.count;
        j["recall_pct"] = r.recall_pct;
        j["fpr_pct"] = r.fpr_pct;
        j["fpr_classical_pct"] = r.fpr_classical_pct;
        j["table_recall_pct"] = r.table_recall_pct;
        j["tables_retained_pct"] = r.tables_retained_pct;
        j["columns_retained_pct"] = r.columns_retained_pct;
        return j;
    };
    Json j;
    j["overall"] = row_json(summary.overall);
    Json rows = Json::array();
    for (const auto& r : summary.by_difficulty) rows.push_back(row_json(r));
    j["by_difficulty"] = std::move(rows);
    return j;
}

Json execution_summary_json(const std::vector<RunRecord>& records) {
    const std::vector<std::string> canonical = {"full", "perfect", "retrieved"};
    const std::vector<std::string> difficulty_order = {"simple", "moderate", "challenging",
                                                       "easy",   "medium",   "hard",
                                                       "extra",  "unknown"};
    Json out = Json::array();
    for (const auto& setting : canonical) {
        std::size_t count = 0;
        std::size_t matches = 0;
        std::map<std::string, std::pair<std::size_t, std::size_t>> by_diff;
        for (const auto& rec : records) {
            for (const auto& g : rec.generation) {
                if (std::string(to_string(g.setting)) != setting) continue;
                ++count;
                auto& d = by_diff[rec.difficulty];
                ++d.first;
                if (g.execution_match) {
                    ++matches;
                    ++d.second;
                }
            }
        }
        if (count == 0) continue;
        Json j;
        j["setting"] = setting;
        Json overall;
        overall["count"] = count;
        overall["ex_pct"] = 100.0 * static_cast<double>(matches) / static_cast<double>(count);
        j["overall"] = std::move(overall);
        Json rows = Json::array();
        for (const auto& label : difficulty_order) {
            auto it = by_diff.find(label);
            if (it == by_diff.end()) continue;
            Json row;
            row["group"] = label;
            row["count"] = it->second.first;
            row["ex_pct"] = 100.0 * static_cast<double>(it->second.second) /
                            static_cast<double>(it->second.first);
            rows.push_back(std::move(row));
        }
        j["by_difficulty"] = std::move(rows);
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace

RunResult run_pipeline(const Config& config, const RunOptions& options) {
    std::vector<std::string> stages = expand_stages(options.stages);
    std::string backend_name =
        options.backend_override.empty() ? config.backend : options.backend_override;

    // Select the examples.
    std::vector<BenchmarkExample> examples =
        load_benchmark(config.dataset_path, benchmark_format_from_string(config.benchmark_format));
    if (!options.ids.empty()) {
        std::set<std::int64_t> keep(options.ids.begin(), options.ids.end());
        std::erase_if(examples, [&](const BenchmarkExample& e) {
            return keep.count(e.question_id) == 0;
        });
    }
    if (options.limit >= 0 && static_cast<std::size_t>(options.limit) < examples.size()) {
        examples.resize(static_cast<std::size_t>(options.limit));
    }

    // Lay out the run directory.
    std::filesystem::path run_dir = options.run_dir;
    if (run_dir.empty()) {
        run_dir = config.runs_dir / (utc_stamp() + "-" + config_hash(config));
    }
    std::filesystem::create_directories(run_dir);
    std::filesystem::path cache_dir =
        config.cache_dir.empty() ? run_dir / "cache" : config.cache_dir;

    std::unique_ptr<Backend> backend = make_backend(config, backend_name, cache_dir);
    PromptTemplates templates = PromptTemplates::load(config.prompts_dir);

    {
        std::ofstream out(run_dir / "config.json");
        out << config_to_json(config).dump(2) << "\n";
    }

    // Load every referenced database once.
    bool needs_schema = stages.size() > 1 || stages[0] != "augment";
    std::map<std::string, DbEntry> databases;
    if (needs_schema) {
        for (const auto& ex : examples) {
            if (databases.count(ex.db_id)) continue;
            DbEntry entry;
            entry.path = resolve_db_path(config.data_root, config.db_path_template, ex.db_id);
            try {
                entry.schema = introspect_schema(entry.path);
                if (config.samples_per_column > 0) {
                    attach_samples(entry.schema, entry.path, config.samples_per_column,
                                   config.sample_max_chars);
                }
            } catch (const std::exception& e) {
                entry.error = e.what();
            }
            databases.emplace(ex.db_id, std::move(entry));
        }
    }

    // Reuse records from an interrupted run when they cover the stages.
    std::map<std::int64_t, RunRecord> previous;
    {
        std::ifstream in(run_dir / "records.jsonl");
        std::string line;
        while (in && std::getline(in, line)) {
            if (trim(line).empty()) continue;
            try {
                RunRecord rec = RunRecord::from_json(Json::parse(line));
                previous.emplace(rec.question_id, std::move(rec));
            } catch (const std::exception&) {
                break;  // truncated tail from a crash
            }
        }
    }

    const std::size_t n = examples.size();
    std::vector<RunRecord> slots(n);
    std::vector<char> done(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = previous.find(examples[i].question_id);
        if (it == previous.end() || it->second.error.has_value()) continue;
        const auto& have = it->second.stages;
        bool covered = true;
        for (const auto& s : stages) {
            covered = covered && std::find(have.begin(), have.end(), s) != have.end();
        }
        if (!covered) continue;
        slots[i] = it->second;
        done[i] = 1;
    }

    std::ofstream out(run_dir / "records.jsonl", std::ios::trunc);
    if (!out) throw UsageError("cannot write " + (run_dir / "records.jsonl").string());

    std::mutex mu;
    std::size_t frontier = 0;
    auto flush_frontier = [&] {
        while (frontier < n && done[frontier]) {
            out << slots[frontier].to_json().dump() << "\n";
            out.flush();
            ++frontier;
        }
    };
    {
        std::lock_guard<std::mutex> lock(mu);
        flush_frontier();
    }

    std::atomic<std::size_t> next{0};
    int workers = options.workers_override > 0 ? options.workers_override : config.workers;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (done[i]) continue;
            }
            const auto& ex = examples[i];
            const DbEntry* db = nullptr;
            if (auto it = databases.find(ex.db_id); it != databases.end()) db = &it->second;
            RunRecord rec = process_example(ex, stages, config, db, *backend, templates);
            std::lock_guard<std::mutex> lock(mu);
            slots[i] = std::move(rec);
            done[i] = 1;
            flush_frontier();
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    out.close();

    // Summaries.
    RunResult result;
    result.run_dir = run_dir;
    result.records = std::move(slots);

    Json summary;
    summary["config_hash"] = config_hash(config);
    summary["backend"] = backend_name;
    summary["stages"] = stages;
    summary["merge_mode"] = config.merge_mode;
    summary["compare_mode"] = config.compare_mode;
    summary["examples"] = n;
    std::size_t errors = 0;
    for (const auto& rec : result.records) errors += rec.error.has_value() ? 1 : 0;
    summary["errors"] = errors;

    std::vector<LinkingScore> scores;
    std::vector<std::string> difficulties;
    for (const auto& rec : result.records) {
        if (!rec.score) continue;
        scores.push_back(*rec.score);
        difficulties.push_back(rec.difficulty);
    }
    if (!scores.empty()) {
        summary["linking"] = linking_summary_json(aggregate(scores, &difficulties));
    }
    Json execution = execution_summary_json(result.records);
    if (!execution.empty()) summary["execution"] = std::move(execution);
    summary["telemetry"] = aggregate_telemetry(result.records);
    result.summary = summary;

    {
        std::ofstream sout(run_dir / "summary.json");
        sout << summary.dump(2) << "\n";
    }
    {
        std::ofstream tout(run_dir / "timings.json");
        tout << backend->telemetry().to_json(true).dump(2) << "\n";
    }
    return result;
}

}  // namespace schemalink
