#pragma once

#include "slim/core/types.hpp"
#include "slim/toolkit/chunking.hpp"
#include "slim/toolkit/scoring.hpp"
#include "slim/toolkit/web.hpp"

#include <cstddef>
#include <string>
#include <string_view>

namespace slim::toolkit {

struct BrowseOptions {
    std::size_t char_limit = 10000;
    ChunkingStrategy chunking = ChunkingStrategy::ByNewline;
    Scorer scorer = Scorer::RougeL;
};

struct BrowseResult {
    std::string text;
    std::string title;
    std::size_t chunk_index = 0;
    std::size_t chunk_count = 0;
};

// The chunk of an already scraped document most similar to the query, or the
// first chunk when the query is blank, truncated to the character limit.
BrowseResult select_section(const Document& doc, std::string_view query, const BrowseOptions& options);

// Scrapes once, then select_section. Propagates ScrapeError.
BrowseResult browse(Scraper& scraper, std::string_view url, std::string_view query, const BrowseOptions& options);

inline constexpr std::size_t kVisitExcerptChars = 2500;

// Excerpt used by the Search-o1 visit step: find the sentence with the best
// token F1 against the search snippet and take `limit` characters forward
// from its start. A blank snippet starts at the top of the page.
std::string visit_excerpt(const Document& doc, std::string_view snippet, std::size_t limit = kVisitExcerptChars);

} // namespace slim::toolkit
