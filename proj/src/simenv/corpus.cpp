#include "slim/simenv/corpus.hpp"

#include "slim/core/json_io.hpp"
#include "slim/core/strings.hpp"
#include "slim/core/url.hpp"
#include "slim/toolkit/text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slim::simenv {

void to_json(json& j, const MockPage& p) {
    json terms = json::array();
    for (const auto& [t, w] : p.rank_terms) {
        terms.push_back(json::array({t, w}));
    }
    j = json{{"url", p.url}, {"title", p.title}, {"content", p.content}, {"rank_terms", terms}};
}

void from_json(const json& j, MockPage& p) {
    p.url = j.at("url").get<std::string>();
    p.title = j.value("title", "");
    p.content = j.value("content", "");
    p.rank_terms.clear();
    if (auto it = j.find("rank_terms"); it != j.end()) {
        if (it->is_array()) {
            for (const auto& pair : *it) {
                p.rank_terms.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
            }
        } else if (it->is_object()) {
            for (const auto& [t, w] : it->items()) {
                p.rank_terms.emplace_back(t, w.get<double>());
            }
        }
    }
}

void to_json(json& j, const PlantedTask& p) {
    j = json{{"task", p.task},
             {"answer_page_url", p.answer_page_url},
             {"required_hops", p.required_hops},
             {"hop_terms", p.hop_terms},
             {"hop_urls", p.hop_urls}};
}

void from_json(const json& j, PlantedTask& p) {
    p.task = j.at("task").get<TaskInstance>();
    p.answer_page_url = j.at("answer_page_url").get<std::string>();
    p.required_hops = j.at("required_hops").get<int>();
    p.hop_terms = j.at("hop_terms").get<std::vector<std::string>>();
    p.hop_urls = j.at("hop_urls").get<std::vector<std::string>>();
}

void Corpus::add(MockPage page) {
    page.url = normalize_url(page.url);
    for (auto& [term, weight] : page.rank_terms) {
        term = to_lower_ascii(term);
    }
    if (by_url_.count(page.url)) {
        throw std::invalid_argument("duplicate page url " + page.url);
    }
    by_url_[page.url] = pages_.size();
    pages_.push_back(std::move(page));
}

void Corpus::plant_scrape_error(const std::string& url) { failing_.insert(normalize_url(url)); }

const MockPage* Corpus::find(const std::string& normalized_url) const {
    auto it = by_url_.find(normalized_url);
    return it == by_url_.end() ? nullptr : &pages_[it->second];
}

void Corpus::merge(const Corpus& other) {
    for (const auto& p : other.pages_) {
        add(p);
    }
    failing_.insert(other.failing_.begin(), other.failing_.end());
}

Corpus Corpus::load(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p);
        if (!in) {
            throw std::runtime_error("cannot read " + p.string());
        }
        std::stringstream ss;
        ss << in.rdbuf();
        return json::parse(ss.str());
    };

    Corpus corpus;
    std::vector<fs::path> files;
    json manifest;
    if (fs::exists(dir / "manifest.json")) {
        manifest = read_file(dir / "manifest.json");
        for (const auto& name : manifest.value("pages", std::vector<std::string>{})) {
            files.push_back(dir / name);
        }
    } else {
        if (!fs::is_directory(dir)) {
            throw std::runtime_error("corpus directory not found: " + dir.string());
        }
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    }
    for (const auto& f : files) {
        corpus.add(read_file(f).get<MockPage>());
    }
    for (const auto& url : manifest.value("failing_urls", std::vector<std::string>{})) {
        corpus.plant_scrape_error(url);
    }
    return corpus;
}

void Corpus::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json manifest{{"schema_version", kSchemaVersion},
                  {"pages", json::array()},
                  {"failing_urls", std::vector<std::string>(failing_.begin(), failing_.end())}};
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "page-%05zu.json", i);
        std::ofstream out(dir / name);
        out << json(pages_[i]).dump(2) << '\n';
        manifest["pages"].push_back(name);
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

std::vector<SearchResult> mock_search(std::string_view query, int k, const Corpus& corpus) {
    std::vector<std::string> terms = toolkit::tokenize(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    std::vector<std::pair<double, const MockPage*>> scored;
    for (const auto& page : corpus.pages()) {
        double score = 0.0;
        for (const auto& [term, weight] : page.rank_terms) {
            if (std::binary_search(terms.begin(), terms.end(), term)) {
                score += weight;
            }
        }
        if (score > 0.0) {
            scored.emplace_back(score, &page);
        }
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->url < b.second->url;
    });
    std::vector<SearchResult> out;
    for (const auto& [score, page] : scored) {
        if (static_cast<int>(out.size()) == k) break;
        out.push_back({page->title, page->url, truncate_chars(page->content, kSnippetCap)});
    }
    return out;
}

std::vector<SearchResult> MockSearchEngine::do_search(std::string_view query, int k) {
    return mock_search(query, k, *corpus_);
}

Document MockScraper::do_scrape(const std::string& url) {
    if (corpus_->scrape_fails(url)) {
        throw toolkit::ScrapeError(url, "planted failure");
    }
    const MockPage* page = corpus_->find(url);
    if (!page) {
        throw toolkit::ScrapeError(url, "unreachable (not in corpus)");
    }
    return Document{page->url, page->title, page->content};
}

} // namespace slim::simenv
