#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace schemalink {

/// ASCII case fold used for every identifier comparison in the pipeline.
/// BIRD/Spider names are ASCII; anything beyond is compared byte-wise.
std::string fold_case(std::string_view s);

std::string to_upper(std::string_view s);

std::string trim(std::string_view s);

bool is_space(char c);

std::vector<std::string> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Strip one layer of identifier quoting: "x", `x`, [x], 'x'.
/// Interior characters (spaces, punctuation) are preserved.
std::string strip_identifier_quotes(std::string_view s);

/// Truncate to at most max_bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string_view s, std::size_t max_bytes);

/// Hex-encoded SHA-256; used for cache keys and config hashes.
std::string sha256_hex(std::string_view data);

} // namespace schemalink
