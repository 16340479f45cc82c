#include "slim/toolkit/html.hpp"

#include "slim/core/strings.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string_view>

namespace slim::toolkit {

namespace {

constexpr std::array<std::string_view, 6> kDropped{"script", "style", "nav", "noscript", "template", "svg"};
constexpr std::array<std::string_view, 4> kRawText{"script", "style", "noscript", "template"};
constexpr std::array<std::string_view, 36> kBlock{
    "p",       "div",    "br",     "li",     "ul",         "ol",     "h1",     "h2",      "h3",
    "h4",      "h5",     "h6",     "tr",     "table",      "section", "article", "header", "footer",
    "main",    "aside",  "blockquote", "pre", "hr",        "dl",     "dt",     "dd",      "figure",
    "figcaption", "form", "address", "caption", "details", "summary", "body",  "html",    "title"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view name) {
    for (auto s : set) {
        if (s == name) return true;
    }
    return false;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
    }
    return true;
}

std::size_t find_ci(std::string_view s, std::size_t from, std::string_view needle) {
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
        if (starts_with_ci(s, i, needle)) return i;
    }
    return std::string_view::npos;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        cp = 0xFFFD;
    }
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    std::size_t end = 0; // index one past '>'
};

// Parses the tag starting at s[pos] == '<'. Returns false when the text is
// not a tag and should be kept literally.
bool parse_tag(std::string_view s, std::size_t pos, Tag& tag) {
    std::size_t i = pos + 1;
    if (i < s.size() && s[i] == '/') {
        tag.closing = true;
        ++i;
    }
    if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) {
        return false;
    }
    std::size_t b = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':')) ++i;
    tag.name = to_lower_ascii(s.substr(b, i - b));
    char quote = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            tag.self_closing = i > pos && s[i - 1] == '/';
            tag.end = i + 1;
            return true;
        }
    }
    tag.end = s.size();
    return true;
}

std::string collapse_line(std::string_view line) {
    std::string out;
    bool pending_space = false;
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

std::string collapse_all(std::string_view text) {
    std::string out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string line = collapse_line(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
        if (!line.empty()) {
            if (!out.empty()) out += '\n';
            out += line;
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

} // namespace

std::string decode_entities(std::string_view text) {
    static constexpr std::array<std::pair<std::string_view, unsigned long>, 20> kNamed{{
        {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
        {"nbsp", ' '},      {"ndash", 0x2013},  {"mdash", 0x2014},  {"hellip", 0x2026}, {"copy", 0xA9},
        {"reg", 0xAE},      {"trade", 0x2122},  {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"ldquo", 0x201C},
        {"rdquo", 0x201D},  {"middot", 0xB7},   {"laquo", 0xAB},    {"raquo", 0xBB},    {"deg", 0xB0},
    }};
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        std::size_t semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out += '&';
            continue;
        }
        std::string_view body = text.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!body.empty() && body[0] == '#') {
            try {
                std::size_t used = 0;
                unsigned long cp = 0;
                if (body.size() > 1 && (body[1] == 'x' || body[1] == 'X')) {
                    cp = std::stoul(std::string(body.substr(2)), &used, 16);
                    done = used == body.size() - 2;
                } else {
                    cp = std::stoul(std::string(body.substr(1)), &used, 10);
                    done = used == body.size() - 1;
                }
                if (done) append_utf8(out, cp);
            } catch (const std::exception&) {
                done = false;
            }
        } else {
            for (const auto& [name, cp] : kNamed) {
                if (name == body) {
                    append_utf8(out, cp);
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi;
        } else {
            out += '&';
        }
    }
    return out;
}

ExtractedPage extract_html(std::string_view html) {
    ExtractedPage page;
    bool have_title = false;
    std::string raw;
    raw.reserve(html.size() / 2);

    std::string skipping; // name of the dropped element being skipped
    int skip_depth = 0;
    int pre_depth = 0; // source line breaks only count inside <pre>

    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            if (skipping.empty()) raw += html[i] == '\n' && pre_depth == 0 ? ' ' : html[i];
            ++i;
            continue;
        }
        if (html.compare(i, 4, "<!--") == 0) {
            std::size_t end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }
        if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
            std::size_t end = html.find('>', i);
            i = end == std::string_view::npos ? html.size() : end + 1;
            continue;
        }
        Tag tag;
        if (!parse_tag(html, i, tag)) {
            if (skipping.empty()) raw += '<';
            ++i;
            continue;
        }
        i = tag.end;

        if (!skipping.empty()) {
            if (tag.name == skipping && !tag.self_closing) {
                skip_depth += tag.closing ? -1 : 1;
                if (skip_depth == 0) skipping.clear();
            }
            continue;
        }
        if (!tag.closing && !tag.self_closing && contains(kRawText, tag.name)) {
            std::size_t end = find_ci(html, i, "</" + tag.name);
            if (end == std::string_view::npos) {
                i = html.size();
            } else {
                std::size_t close = html.find('>', end);
                i = close == std::string_view::npos ? html.size() : close + 1;
            }
            continue;
        }
        if (!tag.closing && !tag.self_closing && contains(kDropped, tag.name)) {
            skipping = tag.name;
            skip_depth = 1;
            continue;
        }
        if (!tag.closing && tag.name == "title") {
            std::size_t end = find_ci(html, i, "</title");
            std::string_view inner = html.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
            if (!have_title) {
                page.title = collapse_line(decode_entities(inner));
                have_title = true;
            }
            if (end == std::string_view::npos) {
                i = html.size();
            } else {
                std::size_t close = html.find('>', end);
                i = close == std::string_view::npos ? html.size() : close + 1;
            }
            raw += '\n';
            continue;
        }
        if (tag.name == "pre" && !tag.self_closing) {
            pre_depth = std::max(0, pre_depth + (tag.closing ? -1 : 1));
        }
        if (contains(kBlock, tag.name)) {
            raw += '\n';
        } else if (tag.name == "td" || tag.name == "th") {
            raw += ' ';
        }
    }
    page.text = collapse_all(decode_entities(raw));
    return page;
}

} // namespace slim::toolkit
