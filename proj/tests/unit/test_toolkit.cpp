#include "local_server.hpp"
#include "test_support.hpp"

#include "slim/core/json_io.hpp"
#include "slim/core/strings.hpp"
#include "slim/core/url.hpp"
#include "slim/toolkit/browse.hpp"
#include "slim/toolkit/html.hpp"
#include "slim/toolkit/text.hpp"

#include <doctest.h>

#include <atomic>
#include <numeric>

using namespace slim;
using namespace slim::toolkit;

namespace {

class MapScraper : public Scraper {
public:
    std::map<std::string, Document> pages;
    int calls = 0;

private:
    Document do_scrape(const std::string& url) override {
        ++calls;
        auto it = pages.find(url);
        if (it == pages.end()) throw ScrapeError(url, "unreachable");
        return it->second;
    }
};

class FixedEngine : public SearchEngine {
public:
    std::vector<SearchResult> results;

private:
    std::vector<SearchResult> do_search(std::string_view, int) override { return results; }
};

std::string words(std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += (i % 7 == 0) ? "\n" : " ";
        out += "w" + std::to_string(i);
    }
    return out;
}

} // namespace

TEST_SUITE("toolkit") {

TEST_CASE("tokenizer") {
    CHECK(tokenize("The  Cat-sat, on (the) MAT!") ==
          std::vector<std::string>{"the", "cat", "sat", "on", "the", "mat"});
    CHECK(tokenize("Café 2024") == std::vector<std::string>{"café", "2024"});
    CHECK(tokenize("  ...  ").empty());
}

TEST_CASE("rouge-l examples") {
    CHECK(rouge_l("the cat", "the cat sat") == doctest::Approx(0.8));
    CHECK(rouge_l("the cat sat", "the cat sat") == doctest::Approx(1.0));
    CHECK(rouge_l("abc", "") == 0.0);
    CHECK(rouge_l("", "abc") == 0.0);
    CHECK(rouge_l("x y", "a b") == 0.0);
}

TEST_CASE("rouge-l agrees with the full-table LCS oracle on random pairs") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        auto a = testing::random_tokens(rng, 20, 6);
        auto b = testing::random_tokens(rng, 20, 6);
        CHECK(lcs_length(a, b) == testing::lcs_oracle(a, b));
        double score = rouge_l(a, b);
        CHECK(score == doctest::Approx(testing::rouge_l_oracle(a, b)));
        CHECK(score >= 0.0);
        CHECK(score <= 1.0);
        if (!a.empty()) CHECK(rouge_l(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("LCS agrees with exhaustive subsequence enumeration on short inputs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        auto a = testing::random_tokens(rng, 10, 4);
        auto b = testing::random_tokens(rng, 10, 4);
        CHECK(lcs_length(a, b) == testing::lcs_enumeration(a, b));
    }
}

TEST_CASE("token f1") {
    CHECK(token_f1("blue widget factory", "the widget factory tour") == doctest::Approx(4.0 / 7.0));
    CHECK(token_f1("same words here", "same words here") == doctest::Approx(1.0));
    CHECK(token_f1("alpha", "beta") == 0.0);
    CHECK(token_f1("", "beta") == 0.0);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        auto a = testing::random_tokens(rng, 15, 5);
        auto b = testing::random_tokens(rng, 15, 5);
        double f = token_f1(a, b);
        CHECK(f == doctest::Approx(testing::token_f1_oracle(a, b)));
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}

TEST_CASE("bm25") {
    std::vector<std::string> page = {"alpha beta", "gamma delta", "alpha beta beta"};
    CHECK(bm25(page[0], "zeta", page) == 0.0);
    CHECK(bm25("only chunk here", "chunk", std::vector<std::string>{"only chunk here"}) > 0.0);

    auto scores = score_chunks(page, "gamma", Scorer::Bm25);
    CHECK(argmax_lowest(scores) == 1);

    std::vector<std::vector<std::string>> tokenized;
    for (const auto& c : page) tokenized.push_back(tokenize(c));
    for (std::size_t i = 0; i < page.size(); ++i) {
        CHECK(scores[i] == doctest::Approx(testing::bm25_oracle(tokenized, i, tokenize("gamma"))));
    }

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<std::string>> chunks;
        std::vector<std::string> texts;
        std::size_t n = 1 + rng() % 6;
        for (std::size_t c = 0; c < n; ++c) {
            auto t = testing::random_tokens(rng, 12, 8);
            if (t.empty()) t.push_back("w0");
            std::string joined;
            for (const auto& w : t) joined += w + " ";
            chunks.push_back(t);
            texts.push_back(joined);
        }
        auto query = testing::random_tokens(rng, 4, 8);
        std::string q;
        for (const auto& w : query) q += w + " ";
        Bm25Index index(texts);
        for (std::size_t c = 0; c < n; ++c) {
            double s = index.score(c, q);
            CHECK(s >= 0.0);
            CHECK(s == doctest::Approx(testing::bm25_oracle(chunks, c, tokenize(q))));
        }
    }
}

TEST_CASE("argmax ties go to the lowest index") {
    std::vector<double> scores = {0.1, 0.5, 0.5, 0.2};
    CHECK(argmax_lowest(scores) == 1);
    CHECK(argmax_lowest(std::vector<double>{0.0, 0.0}) == 0);
}

TEST_CASE("chunking examples") {
    CHECK(chunk("a\n\nb\nc", ChunkingStrategy::ByNewline) == std::vector<std::string>{"a", "b", "c"});
    CHECK(chunk("a\n   \n\nb", ChunkingStrategy::ByNewline) == std::vector<std::string>{"a", "b"});
    CHECK(chunk("", ChunkingStrategy::ByNewline).empty());
    CHECK(chunk("", ChunkingStrategy::ByWords).empty());

    auto windows = chunk(words(250), ChunkingStrategy::ByWords);
    REQUIRE(windows.size() == 3);
    CHECK(tokenize(windows[0]).size() == 100);
    CHECK(tokenize(windows[1]).size() == 100);
    CHECK(tokenize(windows[2]).size() == 50);
}

TEST_CASE("word windows partition the word sequence") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        std::string text = words(rng() % 400);
        std::vector<std::string> original;
        std::istringstream in(text);
        for (std::string w; in >> w;) original.push_back(w);

        std::size_t window = 1 + rng() % 120;
        std::vector<std::string> rejoined;
        auto windows = chunk(text, ChunkingStrategy::ByWords, window);
        for (std::size_t k = 0; k < windows.size(); ++k) {
            std::istringstream win(windows[k]);
            std::size_t count = 0;
            for (std::string w; win >> w; ++count) rejoined.push_back(w);
            if (k + 1 < windows.size()) CHECK(count == window);
        }
        CHECK(rejoined == original);
    }
}

TEST_CASE("sentence splitting keeps offsets") {
    std::string text = "First one. Second? Third!\nFourth line";
    auto s = split_sentences(text);
    REQUIRE(s.size() == 4);
    CHECK(s[1].text == "Second?");
    CHECK(s[3].text == "Fourth line");
    for (const auto& sent : s) {
        CHECK(text.compare(sent.offset, sent.text.size(), sent.text) == 0);
    }
}

TEST_CASE("browse picks the best section") {
    MapScraper scraper;
    Document page{"https://fixture.example/p", "Fixture", testing::slurp(testing::fixture("three_chunks.txt"))};
    scraper.pages[page.url] = page;

    BrowseOptions opts;
    auto r = browse(scraper, page.url, "gamma delta", opts);
    CHECK(r.text == "gamma delta");
    CHECK(r.chunk_index == 1);
    CHECK(r.chunk_count == 3);
    CHECK(scraper.calls == 1);

    // LCS oracle over the three chunks: 2/2 words vs 1 word for "alpha gamma"
    auto q = tokenize("gamma delta");
    CHECK(testing::rouge_l_oracle(tokenize("gamma delta"), q) > testing::rouge_l_oracle(tokenize("alpha gamma"), q));

    CHECK(browse(scraper, page.url, "", opts).text == "alpha beta");
    CHECK(browse(scraper, page.url, "   ", opts).chunk_index == 0);
    opts.scorer = Scorer::Bm25;
    CHECK(browse(scraper, page.url, "gamma", opts).chunk_index == 1);
    opts.scorer = Scorer::TokenF1;
    CHECK(browse(scraper, page.url, "alpha gamma", opts).chunk_index == 2);

    opts.char_limit = 0;
    CHECK_THROWS_AS(browse(scraper, page.url, "x", opts), std::invalid_argument);
    CHECK_THROWS_AS(browse(scraper, "https://missing.example", "x", BrowseOptions{}), ScrapeError);
}

TEST_CASE("browse defaults") {
    BrowseOptions opts;
    CHECK(opts.char_limit == 10000);
    CHECK(opts.scorer == Scorer::RougeL);
    CHECK(opts.chunking == ChunkingStrategy::ByNewline);
}

TEST_CASE("browse output never exceeds the limit and ignores chunk order of evaluation") {
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 200; ++i) {
        std::string content;
        std::size_t paragraphs = 1 + rng() % 8;
        for (std::size_t p = 0; p < paragraphs; ++p) {
            auto toks = testing::random_tokens(rng, 30, 10);
            for (const auto& t : toks) content += t + " ";
            content += "é\n";
        }
        Document doc{"https://x.example", "", content};
        BrowseOptions opts;
        opts.char_limit = 1 + rng() % 60;
        opts.scorer = static_cast<Scorer>(rng() % 3);
        auto q = testing::random_tokens(rng, 3, 10);
        std::string query;
        for (const auto& t : q) query += t + " ";
        auto r = select_section(doc, query, opts);
        CHECK(char_count(r.text) <= opts.char_limit);

        // the selected chunk is the first maximum whichever way the scores are visited
        auto chunks = chunk(content, opts.chunking);
        auto scores = score_chunks(chunks, query, opts.scorer);
        std::vector<std::size_t> order(chunks.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::size_t best = order[0];
        for (std::size_t k : order) {
            if (scores[k] > scores[best] || (scores[k] == scores[best] && k < best)) best = k;
        }
        if (!trim(query).empty()) CHECK(r.chunk_index == best);
    }
}

TEST_CASE("visit excerpt starts at the best matching sentence") {
    Document doc{"u", "", "Intro text here. The widget factory opened in 1990. Closing words."};
    auto ex = visit_excerpt(doc, "widget factory 1990", 20);
    CHECK(ex == "The widget factory o");
    CHECK(visit_excerpt(doc, "", 5) == "Intro");
    CHECK(kVisitExcerptChars == 2500);
    std::string big(10000, 'a');
    CHECK(char_count(visit_excerpt(Document{"u", "", big}, "a")) == 2500);
    CHECK(visit_excerpt(Document{"u", "", ""}, "x").empty());
}

TEST_CASE("html extraction golden file") {
    auto page = extract_html(testing::slurp(testing::fixture("html/article.html")));
    CHECK(page.title == "Glass Harbor & the Lighthouse");
    CHECK(page.text == testing::slurp(testing::fixture("html/article.expected.txt")));

    auto empty = extract_html(testing::slurp(testing::fixture("html/markup_only.html")));
    CHECK(empty.text.empty());
    CHECK(empty.title.empty());

    CHECK(extract_html("<pre>a\n  b</pre>").text == "a\nb");
    CHECK(decode_entities("&amp;lt; &#65;&#x42; &bogus;") == "&lt; AB &bogus;");
}

TEST_CASE("search engine wrapper enforces the result contract") {
    FixedEngine engine;
    engine.results = {{"A", "HTTPS://A.example/x/", std::string(400, 's')},
                      {"bad", "not a url", "x"},
                      {"B", "https://b.example", "b"},
                      {"C", "https://c.example", "c"}};
    auto r = engine.search("query", 2);
    REQUIRE(r.size() == 2);
    CHECK(r[0].url == "https://a.example/x");
    CHECK(char_count(r[0].snippet) == kSnippetCap);
    CHECK(r[1].title == "B");
    CHECK_THROWS_AS(engine.search("", 10), std::invalid_argument);
    CHECK_THROWS_AS(engine.search("q", 0), std::invalid_argument);
    engine.results.clear();
    CHECK(engine.search("q", 10).empty());
}

TEST_CASE("serper client against a local endpoint") {
    std::string seen_key;
    json seen_body;
    std::atomic<int> hits{0};
    testing::LocalServer server([&](httplib::Server& s) {
        s.Post("/search", [&](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            seen_key = req.get_header_value("X-API-KEY");
            seen_body = json::parse(req.body);
            res.set_content(R"({"organic":[{"title":"T1","link":"https://one.example/","snippet":"s1"},
                               {"title":"no link"},{"title":"T2","link":"https://two.example/a","snippet":"s2"}]})",
                            "application/json");
        });
        s.Post("/down", [&](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 503;
        });
    });
    SerperSearch serper({"k123", server.url("/search"), std::chrono::seconds(5), 3, std::chrono::milliseconds(1)});
    auto r = serper.search("who built it", 10);
    REQUIRE(r.size() == 2);
    CHECK(r[0].url == "https://one.example");
    CHECK(seen_key == "k123");
    CHECK(seen_body["q"] == "who built it");
    CHECK(seen_body["num"] == 10);

    hits = 0;
    SerperSearch down({"k", server.url("/down"), std::chrono::seconds(5), 3, std::chrono::milliseconds(1)});
    CHECK_THROWS_AS(down.search("q", 10), SearchProviderError);
    CHECK(hits == 3);
}

TEST_CASE("http scraper extracts, rejects, and caches") {
    std::atomic<int> hits{0};
    testing::LocalServer server([&](httplib::Server& s) {
        s.Get("/page", [&](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.set_content(testing::slurp(testing::fixture("html/article.html")), "text/html; charset=utf-8");
        });
        s.Get("/plain", [](const httplib::Request&, httplib::Response& res) { res.set_content("alpha beta", "text/plain"); });
        s.Get("/pdf", [](const httplib::Request&, httplib::Response& res) { res.set_content("%PDF", "application/pdf"); });
        s.Get("/gone", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
    });
    HttpScraper scraper(HttpScraperConfig{std::chrono::seconds(5)});
    auto doc = scraper.scrape(server.url("/page"));
    CHECK(doc.title == "Glass Harbor & the Lighthouse");
    CHECK(doc.content == testing::slurp(testing::fixture("html/article.expected.txt")));
    CHECK(scraper.scrape(server.url("/plain")).content == "alpha beta");
    CHECK_THROWS_AS(scraper.scrape(server.url("/pdf")), ScrapeError);
    CHECK_THROWS_AS(scraper.scrape(server.url("/gone")), ScrapeError);
    CHECK_THROWS_AS(scraper.scrape("http://127.0.0.1:1/closed"), ScrapeError);
    CHECK_THROWS_AS(scraper.scrape("nonsense"), ScrapeError);

    testing::TempDir cache;
    auto inner = std::make_shared<HttpScraper>(HttpScraperConfig{std::chrono::seconds(5)});
    CachingScraper cached(inner, cache.path());
    hits = 0;
    auto first = cached.scrape(server.url("/page/"));
    auto second = cached.scrape(server.url("/page"));
    CHECK(first == second);
    CHECK(hits == 1);
    CHECK(std::filesystem::exists(cached.path_for(first.url)));
    CHECK_THROWS_AS(cached.scrape(server.url("/gone")), ScrapeError);
    CHECK_FALSE(std::filesystem::exists(cached.path_for(normalize_url(server.url("/gone")))));
}

}
