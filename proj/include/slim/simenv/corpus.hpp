#pragma once

#include "slim/core/types.hpp"
#include "slim/llm/scripted.hpp"
#include "slim/toolkit/web.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace slim::simenv {

struct MockPage {
    std::string url;
    std::string title;
    std::string content;
    // Query terms that retrieve this page and how strongly.
    std::vector<std::pair<std::string, double>> rank_terms;

    friend bool operator==(const MockPage&, const MockPage&) = default;
};

// Immutable once loaded; safe to share between threads.
class Corpus {
public:
    // Throws std::invalid_argument on duplicate (normalized) URLs.
    void add(MockPage page);
    void plant_scrape_error(const std::string& url);

    const MockPage* find(const std::string& normalized_url) const;
    const std::vector<MockPage>& pages() const { return pages_; }
    bool scrape_fails(const std::string& normalized_url) const { return failing_.count(normalized_url) > 0; }
    const std::set<std::string>& failing_urls() const { return failing_; }

    // Merges another corpus in; URLs must stay unique.
    void merge(const Corpus& other);

    // Directory layout: manifest.json listing page files plus one JSON file
    // per page {url, title, content, rank_terms}.
    static Corpus load(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

private:
    std::vector<MockPage> pages_;
    std::map<std::string, std::size_t> by_url_;
    std::set<std::string> failing_;
};

// Pages scored by the summed weight of distinct query tokens found in their
// rank_terms; zero-score pages are excluded; ties broken by URL. Snippets
// are the first kSnippetCap characters of the content.
std::vector<SearchResult> mock_search(std::string_view query, int k, const Corpus& corpus);

class MockSearchEngine : public toolkit::SearchEngine {
public:
    explicit MockSearchEngine(std::shared_ptr<const Corpus> corpus) : corpus_(std::move(corpus)) {}

private:
    std::vector<SearchResult> do_search(std::string_view query, int k) override;
    std::shared_ptr<const Corpus> corpus_;
};

class MockScraper : public toolkit::Scraper {
public:
    explicit MockScraper(std::shared_ptr<const Corpus> corpus) : corpus_(std::move(corpus)) {}

private:
    Document do_scrape(const std::string& normalized_url) override;
    std::shared_ptr<const Corpus> corpus_;
};

struct PlantedTask {
    TaskInstance task;
    std::string answer_page_url;
    int required_hops = 1;
    std::vector<std::string> hop_terms; // hop_terms[i] retrieves hop_urls[i]
    std::vector<std::string> hop_urls;

    friend bool operator==(const PlantedTask&, const PlantedTask&) = default;
};

inline constexpr double kChainWeight = 10.0;
inline constexpr const char* kHopBrowseQuery = "next lead keyword";
inline constexpr const char* kAnswerBrowseQuery = "final answer";

// A breadcrumb chain of `depth` pages: page i names the unique term that
// retrieves page i+1, the last page holds the answer. Breadcrumbs and the
// answer sit below the snippet window, so only browsing reveals them. Noise
// pages match the first terms with lower weight. Fully determined by seed.
std::pair<Corpus, PlantedTask> generate_planted_corpus(std::uint64_t seed, int depth, int noise_pages);

// Script of an agent that follows the breadcrumbs: one search and one browse
// per hop, then the exact answer.
std::vector<llm::ScriptEntry> oracle_script(const PlantedTask& planted);

struct PlantedBundle {
    std::vector<PlantedTask> tasks;
    std::size_t page_count = 0;
};

// `count` planted tasks with consecutive seeds, written as corpus/,
// dataset.jsonl, planted.jsonl and oracle_script.jsonl under `out`.
PlantedBundle write_planted_bundle(std::uint64_t seed, int depth, int noise_pages, int count,
                                   const std::filesystem::path& out);

void to_json(nlohmann::json& j, const MockPage& p);
void from_json(const nlohmann::json& j, MockPage& p);
void to_json(nlohmann::json& j, const PlantedTask& p);
void from_json(const nlohmann::json& j, PlantedTask& p);

} // namespace slim::simenv
