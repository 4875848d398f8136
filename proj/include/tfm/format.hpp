#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tfm {

/// Shortest decimal that round-trips to the same double ('.' separator, locale-free).
std::string format_double(double v);

/// Fixed significant digits, locale-free; used for CSV sweep output.
std::string format_sig(double v, int significant_digits);

/// Strict parsers: the whole string must be consumed. Throw ConfigError naming `what`.
double        parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` text. '#' starts a comment, blank lines are skipped,
/// surrounding whitespace is trimmed. Throws ConfigError on a line without
/// '=' or a repeated key.
KeyValues parse_key_values(std::string_view text);

/// Splits on commas and trims each piece; empty pieces are dropped.
std::vector<std::string> split_list(std::string_view text);

}  // namespace tfm
