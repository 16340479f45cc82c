#pragma once

#include "slim/core/types.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slim::toolkit {

class SearchProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScrapeError : public std::runtime_error {
public:
    ScrapeError(std::string url, std::string cause)
        : std::runtime_error("scrape failed for " + url + ": " + cause), url_(std::move(url)),
          cause_(std::move(cause)) {}
    const std::string& url() const { return url_; }
    const std::string& cause() const { return cause_; }

private:
    std::string url_;
    std::string cause_;
};

// Results come back in engine rank order, at most k of them, with
// normalized URLs and snippets capped at kSnippetCap characters. Results
// whose URL does not parse are dropped.
class SearchEngine {
public:
    virtual ~SearchEngine() = default;
    std::vector<SearchResult> search(std::string_view query, int k);

private:
    virtual std::vector<SearchResult> do_search(std::string_view query, int k) = 0;
};

class Scraper {
public:
    virtual ~Scraper() = default;
    // Throws ScrapeError.
    Document scrape(std::string_view url);

private:
    virtual Document do_scrape(const std::string& normalized_url) = 0;
};

struct SerperConfig {
    std::string api_key;
    std::string endpoint = "https://google.serper.dev/search";
    std::chrono::seconds timeout{30};
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
};

// Google results through the Serper API.
class SerperSearch : public SearchEngine {
public:
    explicit SerperSearch(SerperConfig config) : config_(std::move(config)) {}

private:
    std::vector<SearchResult> do_search(std::string_view query, int k) override;
    SerperConfig config_;
};

std::vector<SearchResult> parse_serper_response(const std::string& body);

inline constexpr std::size_t kMaxScrapeBytes = 2 * 1024 * 1024;

struct HttpScraperConfig {
    std::chrono::seconds timeout{30};
    std::size_t max_bytes = kMaxScrapeBytes;
    std::string user_agent = "Mozilla/5.0 (compatible; slim-agent/1.0)";
};

class HttpScraper : public Scraper {
public:
    explicit HttpScraper(HttpScraperConfig config = {}) : config_(std::move(config)) {}

private:
    Document do_scrape(const std::string& normalized_url) override;
    HttpScraperConfig config_;
};

// Content-addressed on-disk cache keyed by the normalized URL. Failures are
// never cached.
class CachingScraper : public Scraper {
public:
    CachingScraper(std::shared_ptr<Scraper> inner, std::filesystem::path dir);
    std::filesystem::path path_for(const std::string& normalized_url) const;

private:
    Document do_scrape(const std::string& normalized_url) override;
    std::shared_ptr<Scraper> inner_;
    std::filesystem::path dir_;
};

} // namespace slim::toolkit
