#include "test_support.hpp"

#include "slim/analysis/errors.hpp"
#include "slim/core/hash.hpp"
#include "slim/core/json_io.hpp"

#include <doctest.h>

using namespace slim;
using namespace slim::analysis;
using llm::ScriptEntry;
using llm::ScriptedLlm;

namespace {

using Calls = std::vector<std::vector<std::string>>;

const prompts::PromptSet kPrompts;
const DetectorContext kCtx{"i1", "Which event?", "UFC 219"};

ScriptEntry yes() { return ScriptEntry::final(R"({"reasoning": "r", "conclusion": "yes"})"); }
ScriptEntry no() { return ScriptEntry::final(R"({"reasoning": "r", "conclusion": "no"})"); }

json load_fixture(const std::string& name) { return json::parse(testing::slurp(testing::fixture("judge/" + name))); }

std::vector<std::string> strings(const json& j) { return j.get<std::vector<std::string>>(); }

Trajectory incorrect_run() {
    Trajectory t;
    t.instance_id = "run-1";
    t.question = "Which event?";
    t.groundtruth = "UFC 219";
    Turn s{1, Action::search("ufc event")};
    s.search_calls = 1;
    s.serp = {{"a", "https://a.example", ""}, {"b", "https://b.example", ""}};
    s.tool_response = "results mentioning UFC 219";
    t.turns.push_back(s);
    Turn s2{2, Action::search("ufc event again")};
    s2.search_calls = 1;
    s2.serp = {{"b", "https://b.example/", ""}};
    s2.tool_response = "same results";
    t.turns.push_back(s2);
    Turn err{3, Action::browse("https://c.example", "x")};
    err.tool_error = true;
    err.tool_response = "Error: could not open";
    t.turns.push_back(err);
    t.final_output = "Explanation: It was UFC 220.\nExact Answer: UFC 220\nConfidence: 60%";
    t.final_answer = "UFC 220";
    return t;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("query detectors") {
    ScriptedLlm llm({yes(), no()});
    llm::Judge judge(llm);
    CHECK(detect_confirmation_bias({"q1"}, kCtx, judge, kPrompts) == Verdict::Yes);
    CHECK(detect_unfocused_search({"q1"}, kCtx, judge, kPrompts) == Verdict::No);
    CHECK(detect_confirmation_bias({}, kCtx, judge, kPrompts) == Verdict::No);
    CHECK(detect_unfocused_search({}, kCtx, judge, kPrompts) == Verdict::No);
    CHECK(judge.calls() == 2);

    auto req = llm.requests()[0];
    CHECK(req[0].content.find("1. q1") != std::string::npos);
    CHECK(req[0].content.find("UFC 219") != std::string::npos);
    CHECK(req[0].content.find("<search-queries>") == std::string::npos);
}

TEST_CASE("recorded confirmation-bias verdict") {
    auto fx = load_fixture("confirmation_bias_fighter.json");
    ScriptedLlm llm({ScriptEntry::final(fx["response"].get<std::string>())});
    llm::Judge judge(llm);
    DetectorContext ctx{"fx", fx["question"], fx["answer"]};
    auto queries = strings(fx["queries"]);
    // eight of the ten queries chase the same fighter
    CHECK(std::count_if(queries.begin(), queries.end(),
                        [](const std::string& q) { return q.find("Elkins") != std::string::npos; }) == 8);
    CHECK(detect_confirmation_bias(queries, ctx, judge, kPrompts) == Verdict::Yes);
}

TEST_CASE("recorded unfocused-search verdict") {
    auto fx = load_fixture("unfocused_question_copy.json");
    ScriptedLlm llm({ScriptEntry::final(fx["response"].get<std::string>())});
    llm::Judge judge(llm);
    DetectorContext ctx{"fx", fx["question"], fx["answer"]};
    auto queries = strings(fx["queries"]);
    for (const auto& q : queries) CHECK(q == ctx.question);
    CHECK(detect_unfocused_search(queries, ctx, judge, kPrompts) == Verdict::Yes);
}

TEST_CASE("unparseable verdicts become indeterminate after one retry") {
    ScriptedLlm llm({ScriptEntry::final("hmm"), ScriptEntry::final("still unsure")});
    llm::Judge judge(llm);
    CHECK(detect_confirmation_bias({"q"}, kCtx, judge, kPrompts) == Verdict::Indeterminate);
    CHECK(judge.calls() == 2);
}

TEST_CASE("inefficient search replay") {
    CHECK(inefficient_search_pct(Calls{{"a", "b"}, {"b"}, {"c"}, {"a", "c"}}) == doctest::Approx(0.5));
    CHECK(inefficient_search_pct(Calls{{"a"}, {"b"}, {"c"}}) == 0.0);
    CHECK(inefficient_search_pct(Calls{{"a"}}) == 0.0);
    CHECK(inefficient_search_pct(std::vector<std::vector<std::string>>{}) == 0.0);
    // empty result sets are never wasted
    CHECK(inefficient_search_pct(Calls{{"a"}, {}}) == 0.0);
    // URLs compare after normalization
    CHECK(inefficient_search_pct(Calls{{"https://A.example/x/"}, {"https://a.example/x"}}) == doctest::Approx(0.5));
}

TEST_CASE("inefficient search depends on call order") {
    CHECK(inefficient_search_pct(Calls{{"b"}, {"c"}, {"a", "b"}, {"a", "c"}}) == doctest::Approx(0.25));
    CHECK(inefficient_search_pct(Calls{{"a", "b"}, {"b"}, {"c"}, {"a", "c"}}) !=
          inefficient_search_pct(Calls{{"b"}, {"c"}, {"a", "b"}, {"a", "c"}}));
}

TEST_CASE("inefficient search agrees with a set-replay oracle and survives persistence") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 300; ++i) {
        Trajectory t;
        std::vector<std::vector<std::string>> calls;
        int n = static_cast<int>(rng() % 8);
        for (int k = 0; k < n; ++k) {
            Turn turn{k + 1, Action::search("q")};
            turn.search_calls = 1;
            std::vector<std::string> urls;
            int m = static_cast<int>(rng() % 4);
            for (int u = 0; u < m; ++u) {
                std::string url = "https://h" + std::to_string(rng() % 5) + ".example";
                urls.push_back(url);
                turn.serp.push_back({"", url, ""});
            }
            calls.push_back(urls);
            t.turns.push_back(turn);
        }
        // oracle: count calls whose non-empty set is contained in the union of earlier sets
        std::set<std::string> seen;
        int wasted = 0;
        for (const auto& c : calls) {
            std::set<std::string> s(c.begin(), c.end());
            if (!s.empty() && std::includes(seen.begin(), seen.end(), s.begin(), s.end())) ++wasted;
            seen.insert(s.begin(), s.end());
        }
        double expected = calls.empty() ? 0.0 : static_cast<double>(wasted) / calls.size();
        CHECK(inefficient_search_pct(t) == doctest::Approx(expected));
        CHECK(inefficient_search_pct(trajectory_from_line(trajectory_to_line(t))) == inefficient_search_pct(t));
    }
}

TEST_CASE("answer-ignored stops at the first positive batch") {
    {
        std::vector<std::string> responses = {"r1", "r2", "UFC 219 was the event", "r4", "r5", "r6", "r7"};
        ScriptedLlm llm({yes()});
        llm::Judge judge(llm);
        CHECK(detect_answer_ignored(responses, kCtx, judge, kPrompts) == Verdict::Yes);
        CHECK(judge.calls() == 1);
        CHECK(llm.requests()[0][0].content.find("Webpage 3:\nUFC 219 was the event") != std::string::npos);
    }
    {
        std::vector<std::string> responses(25, "nothing");
        responses[12] = "UFC 219";
        ScriptedLlm llm({no(), yes(), no()});
        llm::Judge judge(llm);
        CHECK(detect_answer_ignored(responses, kCtx, judge, kPrompts) == Verdict::Yes);
        CHECK(judge.calls() == 2);
        CHECK(llm.remaining() == 1);
    }
    {
        ScriptedLlm llm({no(), no(), no()});
        llm::Judge judge(llm);
        CHECK(detect_answer_ignored(std::vector<std::string>(21, "x"), kCtx, judge, kPrompts) == Verdict::No);
        CHECK(judge.calls() == 3);
    }
    ScriptedLlm none({});
    llm::Judge judge(none);
    CHECK(detect_answer_ignored({}, kCtx, judge, kPrompts) == Verdict::No);
    CHECK(judge.calls() == 0);
}

TEST_CASE("answer-ignored call count never exceeds the batch count") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        std::size_t n = rng() % 45;
        std::vector<ScriptEntry> script;
        std::size_t first_yes = 10;
        for (std::size_t k = 0; k < 10; ++k) {
            bool y = rng() % 4 == 0;
            if (y && first_yes == 10) first_yes = k;
            script.push_back(y ? yes() : no());
        }
        ScriptedLlm llm(script);
        llm::Judge judge(llm);
        auto v = detect_answer_ignored(std::vector<std::string>(n, std::string(5000, 'r')), kCtx, judge, kPrompts);
        std::size_t batches = (n + kResponsesPerBatch - 1) / kResponsesPerBatch;
        CHECK(static_cast<std::size_t>(judge.calls()) == std::min(batches, first_yes + 1));
        CHECK((v == Verdict::Yes) == (first_yes < batches));
        // each response is cut to the character limit
        for (const auto& req : llm.requests()) CHECK(req[0].content.find(std::string(4001, 'r')) == std::string::npos);
    }
}

TEST_CASE("abstention") {
    auto fx = load_fixture("abstention_dont_know.json");
    ScriptedLlm llm({ScriptEntry::final(fx["response"].get<std::string>()), no()});
    llm::Judge judge(llm);
    CHECK(detect_abstention(fx["final_output"].get<std::string>(), kCtx, judge, kPrompts) == Verdict::Yes);
    CHECK(detect_abstention(std::string("Exact Answer: UFC 220\nConfidence: 90%"), kCtx, judge, kPrompts) ==
          Verdict::No);
    CHECK(detect_abstention(std::nullopt, kCtx, judge, kPrompts) == Verdict::Yes);
    CHECK(detect_abstention(std::string("  "), kCtx, judge, kPrompts) == Verdict::Yes);
    CHECK(judge.calls() == 2);
}

TEST_CASE("claim decomposition of the in-prompt example") {
    // the shipped prompt carries a worked example; its claim list is the expected output
    const std::string& prompt = kPrompts.get("judge/claim_decomposition");
    auto start = prompt.find("Atomic Claims:");
    REQUIRE(start != std::string::npos);
    std::vector<std::string> example;
    std::istringstream lines(prompt.substr(start));
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("- ", 0) == 0) example.push_back(line.substr(2));
    }
    REQUIRE(example.size() == 10);
    CHECK(example[0] == "Ricky Glenn was the loser");

    auto explanation_start = prompt.find("Explanation:");
    std::string explanation = prompt.substr(explanation_start, start - explanation_start);
    ScriptedLlm llm({ScriptEntry::final(json{{"claims", example}}.dump())});
    llm::Judge judge(llm);
    auto claims = decompose_claims(explanation, kCtx, judge, kPrompts);
    REQUIRE(claims);
    REQUIRE(claims->size() == 10);
    CHECK(claims->front().text == "Ricky Glenn was the loser");
    CHECK(llm.requests()[0][1].content.find("UFC 219: Cyborg vs Holm") != std::string::npos);
}

TEST_CASE("claim decomposition edge cases") {
    auto fx = load_fixture("decomposition_two_sentences.json");
    ScriptedLlm llm({ScriptEntry::final(fx["response"].get<std::string>())});
    llm::Judge judge(llm);
    auto claims = decompose_claims(fx["explanation"].get<std::string>(), kCtx, judge, kPrompts);
    REQUIRE(claims);
    CHECK(claims->size() == 3);

    ScriptedLlm none({});
    llm::Judge idle(none);
    auto empty = decompose_claims("   ", kCtx, idle, kPrompts);
    REQUIRE(empty);
    CHECK(empty->empty());
    CHECK(idle.calls() == 0);

    std::vector<std::string> many;
    for (int i = 0; i < 14; ++i) many.push_back("claim " + std::to_string(i));
    ScriptedLlm big({ScriptEntry::final(json(many).dump())});
    llm::Judge judge_big(big);
    CHECK(decompose_claims("x", kCtx, judge_big, kPrompts)->size() == kMaxClaims);

    ScriptedLlm bad({ScriptEntry::final("no list"), ScriptEntry::final("[1, 2]")});
    llm::Judge judge_bad(bad);
    CHECK_FALSE(decompose_claims("x", kCtx, judge_bad, kPrompts));
    CHECK(judge_bad.calls() == 2);
}

TEST_CASE("hallucination rate") {
    auto ten = [] {
        std::vector<AtomicClaim> c;
        for (int i = 0; i < 10; ++i) c.push_back({"claim " + std::to_string(i), false});
        return c;
    };
    {
        auto claims = ten();
        ScriptedLlm llm({ScriptEntry::final("[0, 1, 2, 3, 4, 5, 6, 7]")});
        llm::Judge judge(llm);
        auto rate = hallucination_rate(claims, {"page"}, kCtx, judge, kPrompts);
        REQUIRE(rate);
        CHECK(*rate == doctest::Approx(2.0 / 10.0));
        CHECK(claims[7].supported);
        CHECK_FALSE(claims[8].supported);
        CHECK(llm.requests()[0][0].content.find("0. claim 0") != std::string::npos);
    }
    {
        auto claims = ten();
        ScriptedLlm llm({ScriptEntry::final(R"({"supported": [0,1,2,3,4,5,6,7,8,9]})")});
        llm::Judge judge(llm);
        CHECK(*hallucination_rate(claims, {"page"}, kCtx, judge, kPrompts) == 0.0);
    }
    {
        auto claims = ten();
        ScriptedLlm none({});
        llm::Judge judge(none);
        CHECK(*hallucination_rate(claims, {}, kCtx, judge, kPrompts) == 1.0);
        CHECK(judge.calls() == 0);
    }
    {
        // a claim counts once any batch supports it
        auto claims = ten();
        ScriptedLlm llm({ScriptEntry::final("[0, 1]"), ScriptEntry::final("[1, 2]")});
        llm::Judge judge(llm);
        CHECK(*hallucination_rate(claims, std::vector<std::string>(15, "p"), kCtx, judge, kPrompts) ==
              doctest::Approx(0.7));
    }
    {
        auto claims = ten();
        ScriptedLlm llm({ScriptEntry::final("[0, 10]"), ScriptEntry::final("[-1]")});
        llm::Judge judge(llm);
        CHECK_FALSE(hallucination_rate(claims, {"p"}, kCtx, judge, kPrompts));
    }
    std::vector<AtomicClaim> none;
    ScriptedLlm idle({});
    llm::Judge judge(idle);
    CHECK_FALSE(hallucination_rate(none, {"p"}, kCtx, judge, kPrompts));
}

TEST_CASE("hallucination rate stays in range") {
    std::mt19937_64 rng(44);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 1 + rng() % 10;
        std::vector<AtomicClaim> claims(n, AtomicClaim{"c", false});
        json idx = json::array();
        for (std::size_t k = 0; k < n; ++k) {
            if (rng() % 2) idx.push_back(k);
        }
        ScriptedLlm llm({ScriptEntry::final(idx.dump())});
        llm::Judge judge(llm);
        auto rate = hallucination_rate(claims, {"p"}, kCtx, judge, kPrompts);
        REQUIRE(rate);
        CHECK(*rate >= 0.0);
        CHECK(*rate <= 1.0);
        CHECK(*rate == doctest::Approx(static_cast<double>(n - idx.size()) / n));
    }
}

TEST_CASE("correct trajectories skip every judge") {
    auto t = incorrect_run();
    ScriptedLlm none({});
    llm::Judge judge(none);
    auto r = analyze_trajectory(t, Outcome::Correct, judge, kPrompts);
    CHECK(judge.calls() == 0);
    CHECK(r.confirmation_bias == Verdict::Skipped);
    CHECK(r.abstention == Verdict::Skipped);
    CHECK_FALSE(r.hallucination_rate);
    CHECK(r.inefficient_search_pct == doctest::Approx(0.5));
}

TEST_CASE("full analysis of an incorrect trajectory") {
    auto t = incorrect_run();
    CHECK(search_queries(t) == std::vector<std::string>{"ufc event", "ufc event again"});
    CHECK(tool_responses(t).size() == 2);

    ScriptedLlm llm({yes(), no(), yes(), no(), ScriptEntry::final(R"({"claims": ["It was UFC 220", "x"]})"),
                     ScriptEntry::final("[1]")});
    testing::TempDir logs;
    llm::JudgeLog log(logs.path());
    llm::Judge judge(llm, &log);
    auto r = analyze_trajectory(t, Outcome::EarlyStopping, judge, kPrompts);
    CHECK(r.confirmation_bias == Verdict::Yes);
    CHECK(r.unfocused_search == Verdict::No);
    CHECK(r.answer_ignored == Verdict::Yes);
    CHECK(r.abstention == Verdict::No);
    REQUIRE(r.hallucination_rate);
    CHECK(*r.hallucination_rate == doctest::Approx(0.5));
    CHECK(r.hallucination == Verdict::Yes);
    CHECK(r.claims.size() == 2);
    CHECK(r.judge_usage == judge.usage());
    CHECK(llm.remaining() == 0);

    // every exchange is on disk with the hash of its prompt
    auto records = read_jsonl(log.path_for("run-1"));
    REQUIRE(records.size() == 6);
    for (const auto& rec : records) {
        auto jr = rec.get<llm::JudgeRecord>();
        CHECK(jr.prompt_sha256 == sha256_hex(jr.prompt));
    }

    json j = r;
    CHECK(j.get<ErrorReport>() == r);
}

TEST_CASE("abstaining trajectories get no hallucination rate") {
    auto t = incorrect_run();
    t.final_output.reset();
    t.final_answer.reset();
    ScriptedLlm llm({no(), no(), no()});
    llm::Judge judge(llm);
    auto r = analyze_trajectory(t, Outcome::MiscError, judge, kPrompts);
    CHECK(r.abstention == Verdict::Yes);
    CHECK_FALSE(r.hallucination_rate);
    CHECK(r.hallucination == Verdict::Skipped);
    CHECK(judge.calls() == 3);
}

TEST_CASE("detector selection") {
    auto t = incorrect_run();
    ScriptedLlm none({});
    llm::Judge judge(none);
    AnalysisOptions only;
    only.detectors = {"inefficient_search"};
    auto r = analyze_trajectory(t, Outcome::EarlyStopping, judge, kPrompts, only);
    CHECK(judge.calls() == 0);
    CHECK(r.inefficient_search_pct == doctest::Approx(0.5));
    CHECK(r.confirmation_bias == Verdict::Skipped);
}

TEST_CASE("aggregation over both denominators") {
    auto report = [](const std::string& id, bool flag) {
        ErrorReport r;
        r.instance_id = id;
        r.confirmation_bias = flag ? Verdict::Yes : Verdict::No;
        return r;
    };
    {
        std::vector<ErrorReport> reports = {report("a", true), report("b", false), report("c", false),
                                            report("d", true)};
        std::map<std::string, Outcome> outcomes = {{"a", Outcome::EarlyStopping},
                                                   {"b", Outcome::EarlyStopping},
                                                   {"c", Outcome::ExceedBudget},
                                                   {"d", Outcome::NoToolUsed}};
        auto agg = aggregate_report(reports, outcomes);
        CHECK(agg.all_samples.confirmation_bias == doctest::Approx(50.0));
    }
    {
        std::vector<ErrorReport> reports = {report("a", false), report("b", true), report("c", false),
                                            report("d", false)};
        reports[0].confirmation_bias = Verdict::Skipped;
        std::map<std::string, Outcome> outcomes = {{"a", Outcome::Correct},
                                                   {"b", Outcome::EarlyStopping},
                                                   {"c", Outcome::EarlyStopping},
                                                   {"d", Outcome::ExceedBudget}};
        auto agg = aggregate_report(reports, outcomes);
        CHECK(agg.all_samples.confirmation_bias == doctest::Approx(100.0 * 1 / 4));
        CHECK(agg.incorrect_only.confirmation_bias == doctest::Approx(100.0 * 1 / 3));
        CHECK(agg.all_samples.correct == doctest::Approx(25.0));
        CHECK(agg.incorrect == 3);
        CHECK(agg.verdicts["confirmation_bias"].skipped == 1);

        auto csv = render_aggregate_csv(agg);
        CHECK(csv.find("all_samples,25.0,25.0") != std::string::npos);
        CHECK(csv.find("incorrect_only,25.0,33.3") != std::string::npos);
        CHECK(render_aggregate_text(agg).find("Confirm Bias") != std::string::npos);
    }
    {
        auto agg = aggregate_report({}, {});
        CHECK(agg.total == 0);
        CHECK(agg.all_samples.confirmation_bias == 0.0);
        CHECK(agg.incorrect_only.hallucination == 0.0);
        CHECK_NOTHROW(render_aggregate_csv(agg));
    }
    CHECK_THROWS_AS(aggregate_report({report("zz", true)}, {}), std::invalid_argument);
}

TEST_CASE("hallucination averages over eligible trajectories only") {
    std::vector<ErrorReport> reports(4);
    std::map<std::string, Outcome> outcomes;
    for (int i = 0; i < 4; ++i) {
        reports[i].instance_id = std::to_string(i);
        reports[i].abstention = Verdict::No;
        outcomes[reports[i].instance_id] = Outcome::EarlyStopping;
    }
    reports[0].hallucination_rate = 0.2;
    reports[1].hallucination_rate = 0.0;
    reports[2].abstention = Verdict::Yes;
    auto agg = aggregate_report(reports, outcomes);
    CHECK(agg.hallucination_eligible == 2);
    CHECK(agg.all_samples.hallucination == doctest::Approx(10.0));
    CHECK(agg.incorrect_only.hallucination == doctest::Approx(10.0));
    CHECK(agg.hallucination_any_pct == doctest::Approx(50.0));
}

}
