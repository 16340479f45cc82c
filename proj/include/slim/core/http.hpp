#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>

namespace slim {

// Connection-level failure: DNS, refused, timeout, TLS. HTTP error statuses
// are returned as responses, not thrown.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HttpRequest {
    std::string method = "GET";
    std::string url;
    std::map<std::string, std::string> headers;
    std::string body;
    std::string content_type = "application/json";
    std::chrono::seconds timeout{30};
    bool follow_redirects = true;
};

struct HttpResponse {
    int status = 0;
    std::map<std::string, std::string> headers; // keys lowercased
    std::string body;

    std::string header(const std::string& lower_name) const {
        auto it = headers.find(lower_name);
        return it == headers.end() ? std::string() : it->second;
    }
};

HttpResponse http_send(const HttpRequest& request);

} // namespace slim
