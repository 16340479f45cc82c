#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace slim::toolkit {

// Shared tokenizer for every scorer: lowercase ASCII, split on runs of
// characters that are not ASCII alphanumerics. Bytes >= 0x80 are kept
// inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

} // namespace slim::toolkit
