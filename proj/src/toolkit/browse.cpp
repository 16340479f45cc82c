#include "slim/toolkit/browse.hpp"

#include "slim/core/strings.hpp"
#include "slim/toolkit/text.hpp"

namespace slim::toolkit {

BrowseResult select_section(const Document& doc, std::string_view query, const BrowseOptions& options) {
    BrowseResult result;
    result.title = doc.title;
    std::vector<std::string> chunks = chunk(doc.content, options.chunking);
    result.chunk_count = chunks.size();
    if (chunks.empty()) {
        return result;
    }
    std::size_t pick = 0;
    if (!trim(query).empty()) {
        std::vector<double> scores = score_chunks(chunks, query, options.scorer);
        pick = argmax_lowest(scores);
    }
    result.chunk_index = pick;
    result.text = truncate_chars(chunks[pick], options.char_limit);
    return result;
}

BrowseResult browse(Scraper& scraper, std::string_view url, std::string_view query, const BrowseOptions& options) {
    if (options.char_limit < 1) {
        throw std::invalid_argument("browse limit must be >= 1");
    }
    Document doc = scraper.scrape(url);
    return select_section(doc, query, options);
}

std::string visit_excerpt(const Document& doc, std::string_view snippet, std::size_t limit) {
    std::vector<Sentence> sentences = split_sentences(doc.content);
    if (sentences.empty()) {
        return {};
    }
    std::size_t start = sentences.front().offset;
    if (!trim(snippet).empty()) {
        auto snippet_tokens = tokenize(snippet);
        std::vector<double> scores;
        scores.reserve(sentences.size());
        for (const auto& s : sentences) {
            auto t = tokenize(s.text);
            scores.push_back(token_f1(t, snippet_tokens));
        }
        start = sentences[argmax_lowest(scores)].offset;
    }
    return truncate_chars(std::string_view(doc.content).substr(start), limit);
}

} // namespace slim::toolkit
