#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "slim/core/http.hpp"
#include "slim/core/strings.hpp"
#include "slim/core/url.hpp"

namespace slim {

HttpResponse http_send(const HttpRequest& request) {
    UrlParts parts = split_url(request.url);
    std::string origin = parts.scheme + "://" + parts.host;
    if (parts.port != 0) {
        origin += ":" + std::to_string(parts.port);
    }
    httplib::Client client(origin);
    client.set_connection_timeout(request.timeout);
    client.set_read_timeout(request.timeout);
    client.set_write_timeout(request.timeout);
    client.set_follow_location(request.follow_redirects);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) {
        headers.emplace(k, v);
    }

    httplib::Result res;
    if (request.method == "GET") {
        res = client.Get(parts.path_and_query, headers);
    } else if (request.method == "POST") {
        res = client.Post(parts.path_and_query, headers, request.body, request.content_type);
    } else {
        throw std::invalid_argument("unsupported http method " + request.method);
    }
    if (!res) {
        throw TransportError(request.method + " " + request.url + ": " + httplib::to_string(res.error()));
    }
    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    for (const auto& [k, v] : res->headers) {
        out.headers[to_lower_ascii(k)] = v;
    }
    return out;
}

} // namespace slim
