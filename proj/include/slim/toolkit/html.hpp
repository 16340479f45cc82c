#pragma once

#include <string>
#include <string_view>

namespace slim::toolkit {

struct ExtractedPage {
    std::string title;
    std::string text;
};

// Markup to readable text. script, style, nav, noscript, template and svg
// subtrees are dropped, block elements become line breaks, entities are
// decoded, whitespace inside a line collapses to one space and blank lines
// are removed.
ExtractedPage extract_html(std::string_view html);

std::string decode_entities(std::string_view text);

} // namespace slim::toolkit
