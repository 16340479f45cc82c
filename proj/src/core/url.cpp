#include "slim/core/url.hpp"

#include "slim/core/strings.hpp"

#include <cctype>

namespace slim {

namespace {

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) {
        return false;
    }
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '+' && c != '-' && c != '.') {
            return false;
        }
    }
    return true;
}

int default_port(std::string_view scheme) {
    if (scheme == "http") return 80;
    if (scheme == "https") return 443;
    return 0;
}

struct Parsed {
    std::string scheme;
    std::string userinfo;
    std::string host;
    std::string port; // digits, may be empty
    std::string path;
    std::string query; // includes leading '?', may be empty
};

Parsed parse(std::string_view raw) {
    std::string_view s = trim(raw);
    if (s.empty()) {
        throw MalformedUrl(std::string(raw));
    }
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            throw MalformedUrl(std::string(raw));
        }
    }
    auto sep = s.find("://");
    if (sep == std::string_view::npos || !valid_scheme(s.substr(0, sep))) {
        throw MalformedUrl(std::string(raw));
    }
    Parsed p;
    p.scheme = to_lower_ascii(s.substr(0, sep));
    std::string_view rest = s.substr(sep + 3);

    if (auto hash = rest.find('#'); hash != std::string_view::npos) {
        rest = rest.substr(0, hash);
    }
    auto auth_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, auth_end);
    std::string_view tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        p.userinfo = std::string(authority.substr(0, at));
        authority = authority.substr(at + 1);
    }
    std::string_view host = authority;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) {
            throw MalformedUrl(std::string(raw));
        }
        host = authority.substr(0, close + 1);
        std::string_view after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') {
                throw MalformedUrl(std::string(raw));
            }
            p.port = std::string(after.substr(1));
        }
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        p.port = std::string(authority.substr(colon + 1));
    }
    for (char c : p.port) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw MalformedUrl(std::string(raw));
        }
    }
    if (p.port.size() > 5) {
        throw MalformedUrl(std::string(raw));
    }
    if (host.empty()) {
        throw MalformedUrl(std::string(raw));
    }
    p.host = to_lower_ascii(host);

    auto q = tail.find('?');
    p.path = std::string(tail.substr(0, q));
    if (q != std::string_view::npos) {
        p.query = std::string(tail.substr(q));
    }
    return p;
}

} // namespace

std::string normalize_url(std::string_view raw) {
    Parsed p = parse(raw);
    std::string out = p.scheme + "://";
    if (!p.userinfo.empty()) {
        out += p.userinfo + "@";
    }
    out += p.host;
    if (!p.port.empty()) {
        int port = std::stoi(p.port);
        if (port != default_port(p.scheme)) {
            out += ":" + std::to_string(port);
        }
    }
    std::string path = p.path;
    while (!path.empty() && path.back() == '/') {
        path.pop_back();
    }
    out += path;
    if (p.query.size() > 1) {
        out += p.query;
    }
    return out;
}

UrlParts split_url(std::string_view raw) {
    Parsed p = parse(raw);
    UrlParts parts;
    parts.scheme = p.scheme;
    parts.host = p.host;
    parts.port = p.port.empty() ? 0 : std::stoi(p.port);
    parts.path_and_query = p.path.empty() ? "/" : p.path;
    parts.path_and_query += p.query;
    return parts;
}

} // namespace slim
