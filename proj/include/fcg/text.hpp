#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fcg::text {

// Splits on single ASCII spaces; consecutive spaces yield empty tokens.
std::vector<std::string> split_spaces(std::string_view s);

// Splits on runs of ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_ws(std::string_view s);

std::vector<std::string_view> split_char(std::string_view s, char sep);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

std::string to_lower_ascii(std::string_view s);

bool iequals_ascii(std::string_view a, std::string_view b);

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);

// Splits a file into lines on LF. A trailing LF does not produce an extra
// empty line; a missing final LF is tolerated.
std::vector<std::string_view> lines(std::string_view s);

namespace utf8 {

// Throws std::invalid_argument on malformed UTF-8.
void validate(std::string_view s);

// Number of Unicode scalar values.
std::size_t length(std::string_view s);

// Byte offset of every scalar value, plus s.size() as the final entry.
std::vector<std::size_t> offsets(std::string_view s);

} // namespace utf8

} // namespace fcg::text
