#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace slim::toolkit {

enum class Scorer { RougeL, Bm25, TokenF1 };

std::string_view to_string(Scorer s);
Scorer scorer_from_string(std::string_view s);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// LCS F-measure. 0 when either side has no tokens.
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);
double rouge_l(std::string_view candidate, std::string_view reference);

// Bag-of-tokens F1 over multiset overlap. 0 when either side is empty.
double token_f1(std::span<const std::string> candidate, std::span<const std::string> reference);
double token_f1(std::string_view candidate, std::string_view reference);

inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;

// BM25 over the chunks of one page; document frequencies and average length
// come from that chunk list only. idf uses the +1 smoothed form so scores are
// never negative.
class Bm25Index {
public:
    explicit Bm25Index(std::span<const std::string> chunks);

    double score(std::size_t chunk, std::string_view query) const;
    double score(std::size_t chunk, std::span<const std::string> query_tokens) const;
    std::size_t size() const { return lengths_.size(); }

private:
    std::vector<std::unordered_map<std::string, int>> term_freqs_;
    std::vector<std::size_t> lengths_;
    std::unordered_map<std::string, int> doc_freq_;
    double avgdl_ = 0.0;
};

double bm25(std::string_view chunk, std::string_view query, std::span<const std::string> page_chunks);

// Scores every chunk against the query with the chosen scorer.
std::vector<double> score_chunks(std::span<const std::string> chunks, std::string_view query, Scorer scorer);

// Index of the highest score; ties go to the lowest index. Requires a
// non-empty score list.
std::size_t argmax_lowest(std::span<const double> scores);

} // namespace slim::toolkit
