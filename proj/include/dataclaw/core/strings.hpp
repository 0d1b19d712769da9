#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dataclaw {

std::string ascii_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);

// Longest prefix of `s` that is at most `max_bytes` long and does not end in
// the middle of a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes);
// First `max_chars` code points of `s`.
std::string_view utf8_first_chars(std::string_view s, std::size_t max_chars);

// Shortest text that parses back to the same double ("2", "0.1", "1e+21").
std::string format_number(double v);

std::string read_file(const std::string& path);

}  // namespace dataclaw
