// Extraction of a JSON object from free-form model output.

#pragma once

#include <string_view>

#include <json.hpp>

namespace schemalink {

// Returns the first balanced {...} block in text that parses as JSON,
// skipping code fences, prose, and stray braces inside string literals.
// Key order is preserved.  Throws JsonExtractError when no such block
// exists; callers own any retry or fallback policy.
nlohmann::ordered_json parse_json_object(std::string_view text);

}  // namespace schemalink
