#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace slim::toolkit {

enum class ChunkingStrategy { ByNewline, ByWords };

inline constexpr std::size_t kWordsPerChunk = 100;

std::string_view to_string(ChunkingStrategy s);
ChunkingStrategy chunking_from_string(std::string_view s);

// ByNewline: paragraphs separated by runs of newlines, whitespace-only
// paragraphs dropped. ByWords: consecutive non-overlapping windows of
// `window` whitespace-separated words joined by single spaces.
std::vector<std::string> chunk(std::string_view content, ChunkingStrategy strategy,
                               std::size_t window = kWordsPerChunk);

struct Sentence {
    std::size_t offset = 0; // byte offset into the source text
    std::string text;
};

// Sentences end at '.', '!' or '?' followed by whitespace, or at a newline.
std::vector<Sentence> split_sentences(std::string_view content);

} // namespace slim::toolkit
