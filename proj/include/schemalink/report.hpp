// Rendering of a finished run's summary as text, JSON or CSV.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace schemalink {

enum class ReportFormat { kText, kJson, kCsv };

ReportFormat report_format_from_string(std::string_view text);

// Reads <run_dir>/summary.json and renders it.  Generation settings always
// appear in the order full, perfect, retrieved.
std::string render_report(const std::filesystem::path& run_dir, ReportFormat format);

}  // namespace schemalink
