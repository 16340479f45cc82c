#include "slim/toolkit/chunking.hpp"

#include <cctype>
#include <stdexcept>

namespace slim::toolkit {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool blank(std::string_view s) {
    for (char c : s) {
        if (!is_space(c)) return false;
    }
    return true;
}
} // namespace

std::string_view to_string(ChunkingStrategy s) {
    return s == ChunkingStrategy::ByNewline ? "newline" : "words";
}

ChunkingStrategy chunking_from_string(std::string_view s) {
    if (s == "newline") return ChunkingStrategy::ByNewline;
    if (s == "words") return ChunkingStrategy::ByWords;
    throw std::invalid_argument("unknown chunking strategy '" + std::string(s) + "'");
}

std::vector<std::string> chunk(std::string_view content, ChunkingStrategy strategy, std::size_t window) {
    std::vector<std::string> out;
    if (strategy == ChunkingStrategy::ByNewline) {
        std::size_t start = 0;
        while (start <= content.size()) {
            std::size_t nl = content.find('\n', start);
            std::string_view para = content.substr(start, nl == std::string_view::npos ? nl : nl - start);
            if (!para.empty() && para.back() == '\r') {
                para.remove_suffix(1);
            }
            if (!blank(para)) {
                out.emplace_back(para);
            }
            if (nl == std::string_view::npos) {
                break;
            }
            start = nl + 1;
        }
        return out;
    }

    if (window == 0) {
        throw std::invalid_argument("word window must be positive");
    }
    std::string current;
    std::size_t words = 0;
    std::size_t i = 0;
    while (i < content.size()) {
        while (i < content.size() && is_space(content[i])) ++i;
        std::size_t b = i;
        while (i < content.size() && !is_space(content[i])) ++i;
        if (b == i) {
            break;
        }
        if (words > 0) {
            current += ' ';
        }
        current.append(content.substr(b, i - b));
        if (++words == window) {
            out.push_back(std::move(current));
            current.clear();
            words = 0;
        }
    }
    if (words > 0) {
        out.push_back(std::move(current));
    }
    return out;
}

std::vector<Sentence> split_sentences(std::string_view content) {
    std::vector<Sentence> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        std::size_t b = start;
        while (b < end && is_space(content[b])) ++b;
        std::size_t e = end;
        while (e > b && is_space(content[e - 1])) --e;
        if (e > b) {
            out.push_back({b, std::string(content.substr(b, e - b))});
        }
    };
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        bool boundary = c == '\n' ||
                        ((c == '.' || c == '!' || c == '?') && (i + 1 == content.size() || is_space(content[i + 1])));
        if (boundary) {
            emit(i + 1);
            start = i + 1;
        }
    }
    emit(content.size());
    return out;
}

} // namespace slim::toolkit
