#include "slim/analysis/errors.hpp"

#include "slim/core/json_io.hpp"
#include "slim/core/strings.hpp"
#include "slim/core/url.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace slim::analysis {
namespace {

std::string numbered(const std::vector<std::string>& items, std::size_t first) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!out.empty()) out += '\n';
        out += fmt::format("{}. {}", i + first, items[i]);
    }
    return out;
}

std::vector<std::string> render_batches(const std::vector<std::string>& responses) {
    std::vector<std::string> batches;
    for (std::size_t start = 0; start < responses.size(); start += kResponsesPerBatch) {
        std::string batch;
        std::size_t end = std::min(responses.size(), start + kResponsesPerBatch);
        for (std::size_t i = start; i < end; ++i) {
            if (!batch.empty()) batch += "\n\n";
            batch += fmt::format("Webpage {}:\n{}", i + 1, truncate_chars(responses[i], kResponseCharLimit));
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

Verdict query_detector(const char* detector, const char* prompt_name, const std::vector<std::string>& queries,
                       const DetectorContext& ctx, llm::Judge& judge, const prompts::PromptSet& prompts) {
    if (queries.empty()) return Verdict::No;
    std::string prompt = prompts::fill(prompts.get(prompt_name), {{"search-queries", numbered(queries, 1)},
                                                                  {"question", ctx.question},
                                                                  {"correct-answer", ctx.groundtruth}});
    return judge.yes_no(ctx.instance_id, detector, prompt);
}

json verdict_json(Verdict v) { return std::string(llm::to_string(v)); }

} // namespace

void to_json(json& j, const ErrorReport& r) {
    json claims = json::array();
    for (const auto& c : r.claims) claims.push_back({{"text", c.text}, {"supported", c.supported}});
    j = json{{"instance_id", r.instance_id},
             {"outcome", to_string(r.outcome)},
             {"confirmation_bias", verdict_json(r.confirmation_bias)},
             {"unfocused_search", verdict_json(r.unfocused_search)},
             {"inefficient_search_pct", r.inefficient_search_pct},
             {"answer_ignored", verdict_json(r.answer_ignored)},
             {"abstention", verdict_json(r.abstention)},
             {"hallucination", verdict_json(r.hallucination)},
             {"hallucination_rate", r.hallucination_rate ? json(*r.hallucination_rate) : json(nullptr)},
             {"claims", claims},
             {"judge_usage",
              {{"input_tokens", r.judge_usage.input_tokens},
               {"cached_input_tokens", r.judge_usage.cached_input_tokens},
               {"output_tokens", r.judge_usage.output_tokens}}}};
}

void from_json(const json& j, ErrorReport& r) {
    r.instance_id = j.at("instance_id").get<std::string>();
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    r.confirmation_bias = llm::verdict_from_string(j.at("confirmation_bias").get<std::string>());
    r.unfocused_search = llm::verdict_from_string(j.at("unfocused_search").get<std::string>());
    r.inefficient_search_pct = j.at("inefficient_search_pct").get<double>();
    r.answer_ignored = llm::verdict_from_string(j.at("answer_ignored").get<std::string>());
    r.abstention = llm::verdict_from_string(j.at("abstention").get<std::string>());
    r.hallucination = llm::verdict_from_string(j.at("hallucination").get<std::string>());
    const auto& rate = j.at("hallucination_rate");
    r.hallucination_rate = rate.is_null() ? std::nullopt : std::optional<double>(rate.get<double>());
    r.claims.clear();
    for (const auto& c : j.at("claims")) r.claims.push_back({c.at("text").get<std::string>(), c.at("supported")});
    const auto& u = j.at("judge_usage");
    r.judge_usage = {u.at("input_tokens").get<std::int64_t>(), u.at("cached_input_tokens").get<std::int64_t>(),
                     u.at("output_tokens").get<std::int64_t>()};
}

std::vector<std::string> search_queries(const Trajectory& t) {
    std::vector<std::string> out;
    for (const auto& turn : t.turns) {
        if (turn.action.kind == ActionKind::Search && !trim(turn.action.query).empty()) {
            out.push_back(turn.action.query);
        }
    }
    return out;
}

std::vector<std::string> tool_responses(const Trajectory& t) {
    std::vector<std::string> out;
    for (const auto& turn : t.turns) {
        if (turn.tool_response && !turn.tool_error) out.push_back(*turn.tool_response);
    }
    return out;
}

Verdict detect_confirmation_bias(const std::vector<std::string>& queries, const DetectorContext& ctx,
                                 llm::Judge& judge, const prompts::PromptSet& prompts) {
    return query_detector("confirmation_bias", "judge/confirmation_bias", queries, ctx, judge, prompts);
}

Verdict detect_unfocused_search(const std::vector<std::string>& queries, const DetectorContext& ctx,
                                llm::Judge& judge, const prompts::PromptSet& prompts) {
    return query_detector("unfocused_search", "judge/unfocused_search", queries, ctx, judge, prompts);
}

double inefficient_search_pct(const std::vector<std::vector<std::string>>& result_urls) {
    if (result_urls.empty()) return 0.0;
    std::set<std::string> seen;
    int wasted = 0;
    for (const auto& urls : result_urls) {
        std::vector<std::string> normalized;
        for (const auto& u : urls) {
            try {
                normalized.push_back(normalize_url(u));
            } catch (const MalformedUrl&) {
                normalized.push_back(u);
            }
        }
        bool all_seen = !normalized.empty() &&
                        std::all_of(normalized.begin(), normalized.end(), [&](const auto& u) { return seen.count(u); });
        if (all_seen) ++wasted;
        seen.insert(normalized.begin(), normalized.end());
    }
    return static_cast<double>(wasted) / static_cast<double>(result_urls.size());
}

double inefficient_search_pct(const Trajectory& t) {
    std::vector<std::vector<std::string>> calls;
    for (const auto& turn : t.turns) {
        if (turn.action.kind != ActionKind::Search || turn.search_calls == 0) continue;
        std::vector<std::string> urls;
        for (const auto& r : turn.serp) urls.push_back(r.url);
        calls.push_back(std::move(urls));
    }
    return inefficient_search_pct(calls);
}

Verdict detect_answer_ignored(const std::vector<std::string>& responses, const DetectorContext& ctx,
                              llm::Judge& judge, const prompts::PromptSet& prompts) {
    bool unsure = false;
    for (const auto& batch : render_batches(responses)) {
        std::string prompt = prompts::fill(prompts.get("judge/answer_ignored"), {{"tool-responses", batch},
                                                                                  {"question", ctx.question},
                                                                                  {"correct-answer", ctx.groundtruth}});
        Verdict v = judge.yes_no(ctx.instance_id, "answer_ignored", prompt);
        if (v == Verdict::Yes) return Verdict::Yes;
        if (v == Verdict::Indeterminate) unsure = true;
    }
    return unsure ? Verdict::Indeterminate : Verdict::No;
}

Verdict detect_abstention(const std::optional<std::string>& final_output, const DetectorContext& ctx,
                          llm::Judge& judge, const prompts::PromptSet& prompts) {
    if (!final_output || trim(*final_output).empty()) return Verdict::Yes;
    std::string prompt = prompts::fill(prompts.get("judge/abstention"), {{"final-output", *final_output}});
    return judge.yes_no(ctx.instance_id, "abstention", prompt);
}

std::optional<std::vector<AtomicClaim>> decompose_claims(const std::string& explanation, const DetectorContext& ctx,
                                                         llm::Judge& judge, const prompts::PromptSet& prompts) {
    if (trim(explanation).empty()) return std::vector<AtomicClaim>{};
    std::string instruction = fmt::format(
        "Explanation: {}\n\nRespond with a JSON object {{\"claims\": [...]}} holding the claims as strings.",
        explanation);
    auto list = judge.json_list(ctx.instance_id, "claim_decomposition", prompts.get("judge/claim_decomposition"),
                                instruction, [](const json& l) {
                                    return std::all_of(l.begin(), l.end(), [](const json& c) { return c.is_string(); });
                                });
    if (!list) return std::nullopt;
    std::vector<AtomicClaim> claims;
    for (const auto& c : *list) {
        if (claims.size() == kMaxClaims) break;
        std::string text(trim(c.get<std::string>()));
        if (!text.empty()) claims.push_back({text, false});
    }
    return claims;
}

std::optional<double> hallucination_rate(std::vector<AtomicClaim>& claims, const std::vector<std::string>& webpages,
                                         const DetectorContext& ctx, llm::Judge& judge,
                                         const prompts::PromptSet& prompts) {
    if (claims.empty()) return std::nullopt;
    const std::size_t n = claims.size();
    std::vector<std::string> texts;
    for (const auto& c : claims) texts.push_back(c.text);
    std::string rendered_claims = numbered(texts, 0);

    auto valid = [n](const json& l) {
        return std::all_of(l.begin(), l.end(), [n](const json& v) {
            return v.is_number_integer() && v.get<std::int64_t>() >= 0 && v.get<std::int64_t>() < static_cast<std::int64_t>(n);
        });
    };
    for (const auto& batch : render_batches(webpages)) {
        if (std::all_of(claims.begin(), claims.end(), [](const auto& c) { return c.supported; })) break;
        std::string prompt = prompts::fill(prompts.get("judge/hallucination"),
                                           {{"webpages", batch}, {"atomic-claims", rendered_claims}});
        auto list = judge.json_list(ctx.instance_id, "hallucination", prompt,
                                    "Respond with a JSON object {\"supported\": [...]} listing the indices of the "
                                    "supported claims.",
                                    valid);
        if (!list) return std::nullopt;
        for (const auto& v : *list) claims[static_cast<std::size_t>(v.get<std::int64_t>())].supported = true;
    }
    auto unsupported = std::count_if(claims.begin(), claims.end(), [](const auto& c) { return !c.supported; });
    return static_cast<double>(unsupported) / static_cast<double>(n);
}

ErrorReport analyze_trajectory(const Trajectory& t, Outcome outcome, llm::Judge& judge,
                               const prompts::PromptSet& prompts, const AnalysisOptions& options) {
    ErrorReport r;
    r.instance_id = t.instance_id;
    r.outcome = outcome;
    auto on = [&](const char* name) { return options.detectors.count(name) > 0; };
    if (on("inefficient_search")) r.inefficient_search_pct = inefficient_search_pct(t);
    if (outcome == Outcome::Correct) return r;

    TokenUsage before = judge.usage();
    DetectorContext ctx{t.instance_id, t.question, t.groundtruth};
    auto queries = search_queries(t);
    auto responses = tool_responses(t);
    if (on("confirmation_bias")) r.confirmation_bias = detect_confirmation_bias(queries, ctx, judge, prompts);
    if (on("unfocused_search")) r.unfocused_search = detect_unfocused_search(queries, ctx, judge, prompts);
    if (on("answer_ignored")) r.answer_ignored = detect_answer_ignored(responses, ctx, judge, prompts);
    if (on("abstention") || on("hallucination")) r.abstention = detect_abstention(t.final_output, ctx, judge, prompts);
    if (on("hallucination") && r.abstention == Verdict::No) {
        auto claims = decompose_claims(*t.final_output, ctx, judge, prompts);
        if (!claims) {
            r.hallucination = Verdict::Indeterminate;
        } else if (!claims->empty()) {
            r.hallucination_rate = hallucination_rate(*claims, responses, ctx, judge, prompts);
            r.claims = std::move(*claims);
            if (r.hallucination_rate) {
                r.hallucination = *r.hallucination_rate > 0 ? Verdict::Yes : Verdict::No;
            } else {
                r.hallucination = Verdict::Indeterminate;
            }
        }
    }
    TokenUsage after = judge.usage();
    r.judge_usage = {after.input_tokens - before.input_tokens,
                     after.cached_input_tokens - before.cached_input_tokens,
                     after.output_tokens - before.output_tokens};
    return r;
}

AggregateReport aggregate_report(const std::vector<ErrorReport>& reports,
                                 const std::map<std::string, Outcome>& outcomes) {
    AggregateReport agg;
    agg.all_samples.normalization = "all_samples";
    agg.incorrect_only.normalization = "incorrect_only";
    agg.total = reports.size();
    if (reports.empty()) return agg;

    std::size_t correct = 0, any_halluc = 0;
    double cb = 0, us = 0, ineff = 0, ab = 0, ai = 0, halluc_sum = 0;
    auto tally = [&](const char* name, Verdict v) {
        auto& c = agg.verdicts[name];
        switch (v) {
        case Verdict::Yes: ++c.yes; break;
        case Verdict::No: ++c.no; break;
        case Verdict::Indeterminate: ++c.indeterminate; break;
        case Verdict::Skipped: ++c.skipped; break;
        }
    };
    for (const auto& r : reports) {
        auto it = outcomes.find(r.instance_id);
        if (it == outcomes.end()) {
            throw std::invalid_argument("no outcome for instance " + r.instance_id);
        }
        tally("confirmation_bias", r.confirmation_bias);
        tally("unfocused_search", r.unfocused_search);
        tally("answer_ignored", r.answer_ignored);
        tally("abstention", r.abstention);
        tally("hallucination", r.hallucination);
        if (it->second == Outcome::Correct) {
            ++correct;
            continue;
        }
        ++agg.incorrect;
        cb += r.confirmation_bias == Verdict::Yes;
        us += r.unfocused_search == Verdict::Yes;
        ab += r.abstention == Verdict::Yes;
        ai += r.answer_ignored == Verdict::Yes;
        ineff += r.inefficient_search_pct;
        if (r.hallucination_rate && r.abstention == Verdict::No) {
            ++agg.hallucination_eligible;
            halluc_sum += *r.hallucination_rate;
            any_halluc += *r.hallucination_rate > 0;
        }
    }
    double halluc = agg.hallucination_eligible ? 100.0 * halluc_sum / agg.hallucination_eligible : 0.0;
    agg.hallucination_any_pct = agg.hallucination_eligible ? 100.0 * any_halluc / agg.hallucination_eligible : 0.0;
    double correct_pct = 100.0 * correct / agg.total;
    auto fill_row = [&](AggregateRow& row, std::size_t denom) {
        row.correct = correct_pct;
        row.hallucination = halluc;
        if (denom == 0) return;
        double d = static_cast<double>(denom);
        row.confirmation_bias = 100.0 * cb / d;
        row.unfocused_search = 100.0 * us / d;
        row.inefficient_search = 100.0 * ineff / d;
        row.abstention = 100.0 * ab / d;
        row.answer_ignored = 100.0 * ai / d;
    };
    fill_row(agg.all_samples, agg.total);
    fill_row(agg.incorrect_only, agg.incorrect);
    return agg;
}

namespace {

std::vector<double> row_values(const AggregateRow& r) {
    return {r.correct,    r.confirmation_bias, r.unfocused_search, r.inefficient_search,
            r.abstention, r.answer_ignored,    r.hallucination};
}

} // namespace

std::string render_aggregate_csv(const AggregateReport& report) {
    std::string out = "normalization";
    for (const char* c : kFailureColumns) out += fmt::format(",{}", c);
    out += '\n';
    for (const auto* row : {&report.all_samples, &report.incorrect_only}) {
        out += row->normalization;
        for (double v : row_values(*row)) out += fmt::format(",{:.1f}", v);
        out += '\n';
    }
    return out;
}

std::string render_aggregate_text(const AggregateReport& report) {
    std::string out = fmt::format("{:<16}", "");
    for (const char* c : kFailureColumns) out += fmt::format("{:>20}", c);
    out += '\n';
    for (const auto* row : {&report.all_samples, &report.incorrect_only}) {
        out += fmt::format("{:<16}", row->normalization);
        for (double v : row_values(*row)) out += fmt::format("{:>20.1f}", v);
        out += '\n';
    }
    out += fmt::format("\ntrajectories: {}  incorrect: {}  hallucination-eligible: {}\n", report.total,
                       report.incorrect, report.hallucination_eligible);
    out += fmt::format("eligible trajectories with any unsupported claim: {:.1f}%\n\n", report.hallucination_any_pct);
    out += fmt::format("{:<20}{:>8}{:>8}{:>16}{:>10}\n", "detector", "yes", "no", "indeterminate", "skipped");
    for (const auto& [name, c] : report.verdicts) {
        out += fmt::format("{:<20}{:>8}{:>8}{:>16}{:>10}\n", name, c.yes, c.no, c.indeterminate, c.skipped);
    }
    return out;
}

} // namespace slim::analysis
