#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace slim {

// Lengths and limits below count Unicode code points of UTF-8 text, so a
// cut never splits a multi-byte sequence.
std::size_t char_count(std::string_view s);
std::string truncate_chars(std::string_view s, std::size_t limit);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

} // namespace slim
