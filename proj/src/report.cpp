#include "schemalink/report.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "schemalink/errors.hpp"
#include "schemalink/metrics.hpp"

namespace schemalink {

namespace {

using Json = nlohmann::ordered_json;

Json load_summary(const std::filesystem::path& run_dir) {
    std::ifstream in(run_dir / "summary.json");
    if (!in) throw UsageError("no summary.json under " + run_dir.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw UsageError("summary.json is not valid JSON: " + std::string(e.what()));
    }
}

std::string pad(const std::string& text, std::size_t width) {
    if (text.size() >= width) return text;
    return text + std::string(width - text.size(), ' ');
}

std::string lead(const std::string& text, std::size_t width) {
    if (text.size() >= width) return text;
    return std::string(width - text.size(), ' ') + text;
}

void render_linking_rows(std::ostringstream& out, const Json& linking) {
    out << "  " << pad("group", 14) << lead("n", 6) << lead("recall", 10) << lead("fpr", 10)
        << lead("fpr_cls", 10) << lead("tbl_rec", 10) << lead("tbl_ret", 10)
        << lead("col_ret", 10) << "\n";
    auto row = [&](const Json& r) {
        out << "  " << pad(r.at("group").get<std::string>(), 14)
            << lead(std::to_string(r.at("count").get<std::size_t>()), 6)
            << lead(format_percent(r.at("recall_pct").get<double>()), 10)
            << lead(format_percent(r.at("fpr_pct").get<double>()), 10)
            << lead(format_percent(r.at("fpr_classical_pct").get<double>()), 10)
            << lead(format_percent(r.at("table_recall_pct").get<double>()), 10)
            << lead(format_percent(r.at("tables_retained_pct").get<double>()), 10)
            << lead(format_percent(r.at("columns_retained_pct").get<double>()), 10) << "\n";
    };
    row(linking.at("overall"));
    for (const auto& r : linking.at("by_difficulty")) row(r);
}

std::string render_text(const Json& summary) {
    std::ostringstream out;
    out << "Run summary\n";
    out << "  config " << summary.value("config_hash", std::string("?")) << ", backend "
        << summary.value("backend", std::string("?")) << ", "
        << summary.value("examples", std::size_t{0}) << " examples, "
        << summary.value("errors", std::size_t{0}) << " errors\n";
    out << "  merge " << summary.value("merge_mode", std::string("?")) << ", comparator "
        << summary.value("compare_mode", std::string("?")) << "\n";

    if (summary.contains("linking")) {
        out << "\nSchema linking (macro average, %)\n";
        render_linking_rows(out, summary["linking"]);
    }

    if (summary.contains("execution")) {
        out << "\nExecution accuracy (%)\n";
        out << "  " << pad("setting", 12) << pad("group", 14) << lead("n", 6) << lead("ex", 10)
            << "\n";
        for (const auto& block : summary["execution"]) {
            const std::string setting = block.at("setting").get<std::string>();
            const Json& overall = block.at("overall");
            out << "  " << pad(setting, 12) << pad("all", 14)
                << lead(std::to_string(overall.at("count").get<std::size_t>()), 6)
                << lead(format_percent(overall.at("ex_pct").get<double>()), 10) << "\n";
            for (const auto& r : block.at("by_difficulty")) {
                out << "  " << pad("", 12) << pad(r.at("group").get<std::string>(), 14)
                    << lead(std::to_string(r.at("count").get<std::size_t>()), 6)
                    << lead(format_percent(r.at("ex_pct").get<double>()), 10) << "\n";
            }
        }
    }
    return out.str();
}

std::string csv_escape(const std::string& text) {
    bool needs_quotes = text.find_first_of(",\"\n") != std::string::npos;
    if (!needs_quotes) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string render_csv(const Json& summary) {
    std::ostringstream out;
    out << "kind,setting,group,count,recall_pct,fpr_pct,fpr_classical_pct,table_recall_pct,"
           "tables_retained_pct,columns_retained_pct,ex_pct\n";
    if (summary.contains("linking")) {
        auto row = [&](const Json& r) {
            out << "linking,," << csv_escape(r.at("group").get<std::string>()) << ","
                << r.at("count").get<std::size_t>() << ","
                << format_percent(r.at("recall_pct").get<double>()) << ","
                << format_percent(r.at("fpr_pct").get<double>()) << ","
                << format_percent(r.at("fpr_classical_pct").get<double>()) << ","
                << format_percent(r.at("table_recall_pct").get<double>()) << ","
                << format_percent(r.at("tables_retained_pct").get<double>()) << ","
                << format_percent(r.at("columns_retained_pct").get<double>()) << ",\n";
        };
        row(summary["linking"].at("overall"));
        for (const auto& r : summary["linking"].at("by_difficulty")) row(r);
    }
    if (summary.contains("execution")) {
        for (const auto& block : summary["execution"]) {
            const std::string setting = block.at("setting").get<std::string>();
            auto row = [&](const std::string& group, const Json& r) {
                out << "execution," << csv_escape(setting) << "," << csv_escape(group) << ","
                    << r.at("count").get<std::size_t>() << ",,,,,,,"
                    << format_percent(r.at("ex_pct").get<double>()) << "\n";
            };
            row("all", block.at("overall"));
            for (const auto& r : block.at("by_difficulty")) {
                row(r.at("group").get<std::string>(), r);
            }
        }
    }
    return out.str();
}

}  // namespace

ReportFormat report_format_from_string(std::string_view text) {
    if (text == "text") return ReportFormat::kText;
    if (text == "json") return ReportFormat::kJson;
    if (text == "csv") return ReportFormat::kCsv;
    throw UsageError("unknown report format: " + std::string(text));
}

std::string render_report(const std::filesystem::path& run_dir, ReportFormat format) {
    Json summary = load_summary(run_dir);
    switch (format) {
        case ReportFormat::kText: return render_text(summary);
        case ReportFormat::kJson: return summary.dump(2) + "\n";
        case ReportFormat::kCsv: return render_csv(summary);
    }
    return {};
}

}  // namespace schemalink
