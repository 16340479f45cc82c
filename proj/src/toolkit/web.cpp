#include "slim/toolkit/web.hpp"

#include "slim/core/hash.hpp"
#include "slim/core/http.hpp"
#include "slim/core/json_io.hpp"
#include "slim/core/strings.hpp"
#include "slim/core/url.hpp"
#include "slim/toolkit/html.hpp"

#include <fstream>
#include <sstream>
#include <thread>

namespace slim::toolkit {

std::vector<SearchResult> SearchEngine::search(std::string_view query, int k) {
    if (trim(query).empty()) {
        throw std::invalid_argument("search query must be non-empty");
    }
    if (k < 1) {
        throw std::invalid_argument("search k must be >= 1");
    }
    std::vector<SearchResult> raw = do_search(query, k);
    std::vector<SearchResult> out;
    out.reserve(std::min<std::size_t>(raw.size(), static_cast<std::size_t>(k)));
    for (auto& r : raw) {
        if (out.size() == static_cast<std::size_t>(k)) {
            break;
        }
        try {
            r.url = normalize_url(r.url);
        } catch (const MalformedUrl&) {
            continue;
        }
        r.snippet = truncate_chars(r.snippet, kSnippetCap);
        out.push_back(std::move(r));
    }
    return out;
}

Document Scraper::scrape(std::string_view url) {
    std::string normalized;
    try {
        normalized = normalize_url(url);
    } catch (const MalformedUrl& e) {
        throw ScrapeError(std::string(url), e.what());
    }
    Document doc = do_scrape(normalized);
    doc.url = normalized;
    return doc;
}

std::vector<SearchResult> parse_serper_response(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw SearchProviderError("serper: response is not a JSON object");
    }
    std::vector<SearchResult> out;
    if (!j.contains("organic") || !j["organic"].is_array()) {
        return out;
    }
    for (const auto& item : j["organic"]) {
        if (!item.is_object() || !item.contains("link") || !item["link"].is_string()) {
            continue;
        }
        out.push_back({item.value("title", ""), item["link"].get<std::string>(), item.value("snippet", "")});
    }
    return out;
}

std::vector<SearchResult> SerperSearch::do_search(std::string_view query, int k) {
    HttpRequest req;
    req.method = "POST";
    req.url = config_.endpoint;
    req.headers["X-API-KEY"] = config_.api_key;
    req.body = json{{"q", query}, {"num", k}}.dump();
    req.timeout = config_.timeout;

    auto backoff = config_.initial_backoff;
    std::string last;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        try {
            HttpResponse res = http_send(req);
            if (res.status >= 200 && res.status < 300) {
                return parse_serper_response(res.body);
            }
            last = "http " + std::to_string(res.status);
            if (res.status != 429 && res.status < 500) {
                break;
            }
        } catch (const TransportError& e) {
            last = e.what();
        }
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw SearchProviderError("search failed: " + last);
}

Document HttpScraper::do_scrape(const std::string& url) {
    HttpRequest req;
    req.method = "GET";
    req.url = url;
    req.headers["User-Agent"] = config_.user_agent;
    req.headers["Accept"] = "text/html,application/xhtml+xml,text/plain;q=0.9";
    req.timeout = config_.timeout;

    HttpResponse res;
    try {
        res = http_send(req);
    } catch (const TransportError& e) {
        throw ScrapeError(url, e.what());
    } catch (const std::invalid_argument& e) {
        throw ScrapeError(url, e.what());
    }
    if (res.status >= 400) {
        throw ScrapeError(url, "http status " + std::to_string(res.status));
    }
    std::string body = std::move(res.body);
    if (body.size() > config_.max_bytes) {
        body.resize(config_.max_bytes);
    }
    std::string type = to_lower_ascii(res.header("content-type"));
    Document doc;
    doc.url = url;
    if (type.empty() || type.find("html") != std::string::npos) {
        ExtractedPage page = extract_html(body);
        doc.title = std::move(page.title);
        doc.content = std::move(page.text);
    } else if (type.rfind("text/", 0) == 0) {
        doc.content = std::move(body);
    } else {
        throw ScrapeError(url, "non-HTML payload (" + type + ")");
    }
    return doc;
}

CachingScraper::CachingScraper(std::shared_ptr<Scraper> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path CachingScraper::path_for(const std::string& normalized_url) const {
    std::string key = sha256_hex(normalized_url);
    return dir_ / key.substr(0, 2) / (key + ".json");
}

Document CachingScraper::do_scrape(const std::string& url) {
    auto path = path_for(url);
    if (std::ifstream in(path); in) {
        std::stringstream ss;
        ss << in.rdbuf();
        json j = json::parse(ss.str(), nullptr, false);
        if (!j.is_discarded()) {
            Document doc = j.get<Document>();
            if (doc.url == url) {
                return doc;
            }
        }
    }
    Document doc = inner_->scrape(url);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary);
        out << json(doc).dump();
    }
    std::filesystem::rename(tmp, path);
    return doc;
}

} // namespace slim::toolkit
