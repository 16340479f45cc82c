#include "slim/toolkit/scoring.hpp"

#include "slim/toolkit/text.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace slim::toolkit {

std::string_view to_string(Scorer s) {
    switch (s) {
    case Scorer::RougeL: return "rouge-l";
    case Scorer::Bm25: return "bm25";
    case Scorer::TokenF1: return "token-f1";
    }
    return "rouge-l";
}

Scorer scorer_from_string(std::string_view s) {
    if (s == "rouge-l" || s == "rougel" || s == "rouge_l") return Scorer::RougeL;
    if (s == "bm25") return Scorer::Bm25;
    if (s == "token-f1" || s == "f1") return Scorer::TokenF1;
    throw std::invalid_argument("unknown scorer '" + std::string(s) + "'");
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) {
        return 0;
    }
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

double f_measure(double overlap, std::size_t candidate_len, std::size_t reference_len) {
    if (overlap <= 0.0 || candidate_len == 0 || reference_len == 0) {
        return 0.0;
    }
    double p = overlap / static_cast<double>(candidate_len);
    double r = overlap / static_cast<double>(reference_len);
    return 2.0 * p * r / (p + r);
}

} // namespace

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
    return f_measure(static_cast<double>(lcs_length(candidate, reference)), candidate.size(), reference.size());
}

double rouge_l(std::string_view candidate, std::string_view reference) {
    auto c = tokenize(candidate);
    auto r = tokenize(reference);
    return rouge_l(c, r);
}

double token_f1(std::span<const std::string> candidate, std::span<const std::string> reference) {
    std::unordered_map<std::string_view, int> counts;
    for (const auto& t : reference) {
        ++counts[t];
    }
    std::size_t common = 0;
    for (const auto& t : candidate) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    return f_measure(static_cast<double>(common), candidate.size(), reference.size());
}

double token_f1(std::string_view candidate, std::string_view reference) {
    auto c = tokenize(candidate);
    auto r = tokenize(reference);
    return token_f1(c, r);
}

Bm25Index::Bm25Index(std::span<const std::string> chunks) {
    term_freqs_.reserve(chunks.size());
    std::size_t total = 0;
    for (const auto& c : chunks) {
        auto tokens = tokenize(c);
        auto& tf = term_freqs_.emplace_back();
        for (auto& t : tokens) {
            if (tf[t]++ == 0) {
                ++doc_freq_[t];
            }
        }
        lengths_.push_back(tokens.size());
        total += tokens.size();
    }
    avgdl_ = lengths_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(lengths_.size());
}

double Bm25Index::score(std::size_t chunk, std::string_view query) const {
    auto q = tokenize(query);
    return score(chunk, q);
}

double Bm25Index::score(std::size_t chunk, std::span<const std::string> query_tokens) const {
    const auto& tf_map = term_freqs_.at(chunk);
    const std::size_t len = lengths_.at(chunk);
    if (len == 0 || avgdl_ <= 0.0) {
        return 0.0;
    }
    const double n = static_cast<double>(lengths_.size());
    const double len_norm = 1.0 - kBm25B + kBm25B * static_cast<double>(len) / avgdl_;
    double total = 0.0;
    for (const auto& term : query_tokens) {
        auto it = tf_map.find(term);
        if (it == tf_map.end()) {
            continue;
        }
        const double tf = it->second;
        const double df = doc_freq_.at(term);
        const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
        total += idf * tf * (kBm25K1 + 1.0) / (tf + kBm25K1 * len_norm);
    }
    return total;
}

double bm25(std::string_view chunk, std::string_view query, std::span<const std::string> page_chunks) {
    for (std::size_t i = 0; i < page_chunks.size(); ++i) {
        if (page_chunks[i] == chunk) {
            return Bm25Index(page_chunks).score(i, query);
        }
    }
    throw std::invalid_argument("bm25: chunk is not part of the page chunk list");
}

std::vector<double> score_chunks(std::span<const std::string> chunks, std::string_view query, Scorer scorer) {
    std::vector<double> scores;
    scores.reserve(chunks.size());
    auto q = tokenize(query);
    switch (scorer) {
    case Scorer::RougeL:
        for (const auto& c : chunks) {
            auto t = tokenize(c);
            scores.push_back(rouge_l(t, q));
        }
        break;
    case Scorer::TokenF1:
        for (const auto& c : chunks) {
            auto t = tokenize(c);
            scores.push_back(token_f1(t, q));
        }
        break;
    case Scorer::Bm25: {
        Bm25Index index(chunks);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            scores.push_back(index.score(i, q));
        }
        break;
    }
    }
    return scores;
}

std::size_t argmax_lowest(std::span<const double> scores) {
    if (scores.empty()) {
        throw std::invalid_argument("argmax of empty score list");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return best;
}

} // namespace slim::toolkit
