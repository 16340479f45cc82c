#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slim {

class MalformedUrl : public std::runtime_error {
public:
    explicit MalformedUrl(const std::string& raw)
        : std::runtime_error("malformed url: '" + raw + "'") {}
};

// Canonical form used everywhere a URL is compared or used as a key:
// lowercase scheme and host, no fragment, no default port, no trailing
// slashes on the path. Idempotent.
std::string normalize_url(std::string_view raw);

struct UrlParts {
    std::string scheme;
    std::string host;
    int port = 0; // 0 when absent
    std::string path_and_query;
};

// Splits an absolute URL. Throws MalformedUrl.
UrlParts split_url(std::string_view raw);

} // namespace slim
