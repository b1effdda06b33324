#include "schemalink/jsonx.hpp"

#include <cstddef>
#include <string>

#include "schemalink/errors.hpp"

namespace schemalink {
namespace {

// Scans a balanced object starting at text[start] (an opening brace).
// Returns one past the closing brace, or npos when unbalanced.
std::size_t balanced_end(std::string_view text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace

nlohmann::ordered_json parse_json_object(std::string_view text) {
    for (std::size_t i = text.find('{'); i != std::string_view::npos;
         i = text.find('{', i + 1)) {
        std::size_t end = balanced_end(text, i);
        if (end == std::string_view::npos) continue;
        auto parsed = nlohmann::ordered_json::parse(text.substr(i, end - i),
                                                    /*cb=*/nullptr,
                                                    /*allow_exceptions=*/false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
    }
    throw JsonExtractError("no parseable JSON object in response of " +
                           std::to_string(text.size()) + " chars");
}

}  // namespace schemalink
