#include "test_support.hpp"

#include "slim/core/hash.hpp"
#include "slim/core/json_io.hpp"
#include "slim/core/prompts.hpp"
#include "slim/core/strings.hpp"
#include "slim/core/url.hpp"

#include <doctest.h>

using namespace slim;

TEST_SUITE("core") {

TEST_CASE("usage meters add component-wise and validate cached <= input") {
    UsageMeter a{100, 40, 10, 2, 3};
    UsageMeter b{50, 0, 5, 1, 0};
    CHECK(a + b == UsageMeter{150, 40, 15, 3, 3});
    CHECK(a.valid());
    CHECK_FALSE(UsageMeter{10, 11, 0, 0, 0}.valid());
    CHECK_FALSE(TokenUsage{-1, 0, 0}.valid());

    UsageMeter m;
    m.add_tokens({7, 2, 3});
    CHECK(m == UsageMeter{7, 2, 3, 0, 0});
}

TEST_CASE("budget validation names the field") {
    Budget b;
    CHECK_NOTHROW(b.validate());
    CHECK(b.max_turns == 150);
    CHECK(b.summary_interval == 50);
    CHECK(b.top_k == 10);
    CHECK(b.browse_char_limit == 10000);
    CHECK(b.trigger() == SummaryTrigger::Interval);

    b.max_turns = 0;
    CHECK_THROWS_WITH_AS(b.validate(), doctest::Contains("max_turns"), std::invalid_argument);
    b = Budget{};
    b.summary_token_threshold = 0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.summary_token_threshold = 5000;
    CHECK(b.trigger() == SummaryTrigger::TokenThreshold);
}

TEST_CASE("budget_consumed counts only searches and browses") {
    Trajectory t;
    t.turns.push_back({1, Action::search("a")});
    t.turns.push_back({2, Action::summarize("s")});
    t.turns.push_back({2, Action::browse("https://x.org", "q")});
    t.turns.push_back({3, Action::final_answer("done")});
    CHECK(budget_consumed(t) == 2);
}

TEST_CASE("url normalization") {
    CHECK(normalize_url("HTTPS://Example.COM:443/a/b/#frag") == "https://example.com/a/b");
    CHECK(normalize_url("http://example.com:80") == "http://example.com");
    CHECK(normalize_url("http://example.com:8080/x?") == "http://example.com:8080/x");
    CHECK(normalize_url("http://example.com/x?b=1") == "http://example.com/x?b=1");
    CHECK(normalize_url("https://example.com/") == normalize_url("https://example.com"));
    CHECK_THROWS_AS(normalize_url("not a url"), MalformedUrl);
    CHECK_THROWS_AS(normalize_url("ftp//missing-colon"), MalformedUrl);

    auto parts = split_url("https://Host.org:8443/p?q=1");
    CHECK(parts.scheme == "https");
    CHECK(parts.host == "host.org");
    CHECK(parts.port == 8443);
    CHECK(parts.path_and_query == "/p?q=1");
}

TEST_CASE("url normalization is idempotent on random urls") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> schemes = {"http", "HTTPS", "Http"};
    const std::vector<std::string> hosts = {"a.com", "WWW.B.org", "c.net:80", "d.io:443", "e.dev:9000"};
    const std::vector<std::string> paths = {"", "/", "/x", "/x/", "/x//", "/A/b?c=1", "/p#f", "/?"};
    for (int i = 0; i < 500; ++i) {
        std::string u = schemes[rng() % schemes.size()] + "://" + hosts[rng() % hosts.size()] +
                        paths[rng() % paths.size()];
        std::string once = normalize_url(u);
        CHECK(normalize_url(once) == once);
    }
}

TEST_CASE("character truncation respects UTF-8 code points") {
    CHECK(char_count("héllo") == 5);
    CHECK(truncate_chars("héllo", 2) == "hé");
    CHECK(truncate_chars("abc", 10) == "abc");
    CHECK(truncate_chars("", 3).empty());
    CHECK(trim("  a b \n") == "a b");
    CHECK(to_lower_ascii("AbC É") == "abc É");
}

TEST_CASE("sha256 matches the standard test vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("trajectory JSON round-trips") {
    Trajectory t;
    t.instance_id = "q1";
    t.question = "Who?";
    t.groundtruth = "Ann";
    t.framework = Framework::SearchO1;
    t.budget.summary_token_threshold = 900;
    Turn s{1, Action::search("who")};
    s.tool_response = "results";
    s.serp = {{"T", "https://a.org", "snip"}};
    s.usage = {10, 2, 3};
    s.aux_usage = {5, 0, 1};
    s.search_calls = 1;
    s.scrape_calls = 10;
    s.reasoning = "thinking";
    t.turns.push_back(s);
    Turn b{2, Action::browse("https://a.org", "ann")};
    b.tool_error = true;
    b.tool_response = "Error";
    t.turns.push_back(b);
    t.turns.push_back({2, Action::final_answer("Exact Answer: Ann")});
    t.context_snapshots.push_back({ChatMessage::system("sys"), ChatMessage::tool("search", "r")});
    t.final_answer = "Ann";
    t.final_output = "Exact Answer: Ann";
    t.usage_total = sum_turn_usage(t);
    t.outcome = Outcome::Correct;
    t.termination = Termination::BudgetExhausted;
    t.error = "none";
    t.wall_time = 1.5;

    Trajectory back = trajectory_from_line(trajectory_to_line(t));
    CHECK(back == t);
    CHECK(t.usage_total == UsageMeter{15, 2, 4, 1, 10});
}

TEST_CASE("trajectory reader rejects other schema versions") {
    json j = Trajectory{};
    j["schema_version"] = 99;
    CHECK_THROWS(trajectory_from_line(j.dump()));
}

TEST_CASE("random trajectories survive serialization") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        Trajectory t;
        t.instance_id = "id" + std::to_string(i);
        t.framework = static_cast<Framework>(rng() % 3);
        int turns = static_cast<int>(rng() % 6);
        for (int k = 0; k < turns; ++k) {
            Turn turn{k + 1, rng() % 2 ? Action::search("q" + std::to_string(rng() % 100))
                                      : Action::browse("https://h.org/" + std::to_string(k), "")};
            turn.usage = {static_cast<std::int64_t>(rng() % 1000), 0, static_cast<std::int64_t>(rng() % 100)};
            turn.search_calls = static_cast<int>(rng() % 2);
            t.turns.push_back(turn);
        }
        if (rng() % 2) t.final_answer = "ä answer \"quoted\"\n";
        t.usage_total = sum_turn_usage(t);
        CHECK(trajectory_from_line(trajectory_to_line(t)) == t);
    }
}

TEST_CASE("dataset reader reports the failing line") {
    testing::TempDir dir;
    testing::spit(dir / "ok.jsonl", "{\"id\":\"a\",\"question\":\"Q?\",\"answer\":\"A\"}\n\n"
                                    "{\"id\":\"b\",\"question\":\"R?\",\"answer\":\"B\",\"dataset_tag\":\"hle\"}\n");
    auto items = read_dataset(dir / "ok.jsonl");
    REQUIRE(items.size() == 2);
    CHECK(items[1].groundtruth == "B");
    CHECK(items[1].dataset_tag == std::optional<std::string>("hle"));

    testing::spit(dir / "bad.jsonl", "{\"id\":\"a\",\"question\":\"Q?\",\"answer\":\"A\"}\n{not json\n");
    try {
        read_dataset(dir / "bad.jsonl");
        FAIL("expected an error");
    } catch (const DatasetError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    testing::spit(dir / "dup.jsonl", "{\"id\":\"a\",\"question\":\"Q\",\"answer\":\"A\"}\n"
                                     "{\"id\":\"a\",\"question\":\"Q\",\"answer\":\"A\"}\n");
    CHECK_THROWS_AS(read_dataset(dir / "dup.jsonl"), DatasetError);
    testing::spit(dir / "noanswer.jsonl", "{\"id\":\"a\",\"question\":\"Q\",\"answer\":\"\"}\n");
    CHECK_THROWS_AS(read_dataset(dir / "noanswer.jsonl"), DatasetError);
}

TEST_CASE("prompt fill is single pass") {
    CHECK(prompts::fill("Q: <question> A: <answer>", {{"question", "<answer>"}, {"answer", "x"}}) ==
          "Q: <answer> A: x");
    CHECK(prompts::fill("<unknown> stays", {{"question", "q"}}) == "<unknown> stays");
}

TEST_CASE("embedded prompts match the shipped files") {
    prompts::PromptSet set;
    for (const auto& name : set.names()) {
        auto path = std::filesystem::path(SLIM_PROMPT_DIR) / (name + ".txt");
        REQUIRE(std::filesystem::exists(path));
        CHECK(set.get(name) == testing::slurp(path));
    }
    CHECK(set.contains("judge/confirmation_bias"));
    CHECK(set.contains("judge/unfocused_search"));
    CHECK(set.contains("judge/answer_ignored"));
    CHECK(set.contains("judge/abstention"));
    CHECK(set.contains("judge/claim_decomposition"));
    CHECK(set.contains("judge/hallucination"));
    CHECK(set.contains("agent/system_slim"));
    CHECK_THROWS_AS(set.get("agent/nope"), std::out_of_range);
}

TEST_CASE("prompt directory overrides a subset") {
    testing::TempDir dir;
    testing::spit(dir / "agent/summarize.txt", "custom summary prompt");
    auto set = prompts::PromptSet::with_overrides(dir.path());
    CHECK(set.get("agent/summarize") == "custom summary prompt");
    CHECK(set.get("agent/final_answer") == prompts::PromptSet{}.get("agent/final_answer"));
    CHECK(set.hashes().at("agent/summarize") == sha256_hex("custom summary prompt"));
}

}
