#include "slim/evaluation/grading.hpp"

#include "slim/accounting/cost.hpp"
#include "slim/core/json_io.hpp"

#include <fmt/format.h>

#include <cctype>
#include <sstream>

namespace slim::evaluation {

std::string_view to_string(Grade g) {
    switch (g) {
    case Grade::Correct: return "correct";
    case Grade::Incorrect: return "incorrect";
    case Grade::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

Grade grade_from_string(std::string_view s) {
    if (s == "correct") return Grade::Correct;
    if (s == "incorrect") return Grade::Incorrect;
    if (s == "indeterminate") return Grade::Indeterminate;
    throw std::invalid_argument("unknown grade: " + std::string(s));
}

std::string normalize_answer(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        if (c < 0x80 && std::ispunct(c)) continue;
        cleaned += (c < 0x80) ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
    }
    std::istringstream words(cleaned);
    std::string word, out;
    while (words >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

bool exact_match(std::string_view a, std::string_view b) { return normalize_answer(a) == normalize_answer(b); }

Grade grade(const std::optional<std::string>& final_answer, const std::string& groundtruth,
            const std::string& question, llm::Judge* judge, const prompts::PromptSet& prompts,
            const std::string& instance_id) {
    if (groundtruth.empty()) {
        throw std::invalid_argument("groundtruth must be non-empty");
    }
    if (!final_answer) return Grade::Incorrect;
    if (exact_match(*final_answer, groundtruth)) return Grade::Correct;
    if (!judge) return Grade::Incorrect;
    std::string prompt = prompts::fill(prompts.get("judge/equivalence"), {{"question", question},
                                                                          {"correct-answer", groundtruth},
                                                                          {"final-output", *final_answer}});
    switch (judge->yes_no(instance_id, "equivalence", prompt)) {
    case llm::Verdict::Yes: return Grade::Correct;
    case llm::Verdict::No: return Grade::Incorrect;
    default: return Grade::Indeterminate;
    }
}

Outcome classify_outcome(const Trajectory& t, Grade grade) {
    if (grade == Grade::Correct) return Outcome::Correct;
    if (t.termination == Termination::OverflowFallback) return Outcome::ExceedContext;
    if (t.termination == Termination::Error || grade == Grade::Indeterminate) return Outcome::MiscError;
    if (accounting::tool_call_count(t) == 0) return Outcome::NoToolUsed;
    // The loop leaves at most T-1 tool turns before the forced answer, so
    // reaching the forced answer is what marks the budget as spent.
    if (t.termination == Termination::BudgetExhausted || budget_consumed(t) >= t.budget.max_turns) {
        return Outcome::ExceedBudget;
    }
    return Outcome::EarlyStopping;
}

void to_json(json& j, const OutcomeRecord& r) {
    j = json{{"instance_id", r.instance_id},
             {"outcome", to_string(r.outcome)},
             {"grade", to_string(r.grade)},
             {"final_answer", r.final_answer ? json(*r.final_answer) : json(nullptr)},
             {"groundtruth", r.groundtruth},
             {"tool_calls", r.tool_calls},
             {"budget_consumed", r.budget_consumed},
             {"termination", to_string(r.termination)}};
}

void from_json(const json& j, OutcomeRecord& r) {
    r.instance_id = j.at("instance_id").get<std::string>();
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    r.grade = grade_from_string(j.at("grade").get<std::string>());
    const auto& fa = j.at("final_answer");
    r.final_answer = fa.is_null() ? std::nullopt : std::optional<std::string>(fa.get<std::string>());
    r.groundtruth = j.value("groundtruth", "");
    r.tool_calls = j.value("tool_calls", std::int64_t{0});
    r.budget_consumed = j.value("budget_consumed", 0);
    r.termination = termination_from_string(j.value("termination", "answered"));
}

OutcomeRecord make_outcome_record(const Trajectory& t, Grade grade) {
    return OutcomeRecord{t.instance_id,          classify_outcome(t, grade), grade, t.final_answer, t.groundtruth,
                         accounting::tool_call_count(t), budget_consumed(t),  t.termination};
}

std::string render_outcome_summary(const std::vector<OutcomeRecord>& records) {
    std::map<Outcome, int> counts;
    for (const auto& r : records) ++counts[r.outcome];
    std::string out = fmt::format("{:<16}{:>8}{:>10}\n", "Outcome", "Count", "Percent");
    for (Outcome o : kAllOutcomes) {
        double pct = records.empty() ? 0.0 : 100.0 * counts[o] / static_cast<double>(records.size());
        out += fmt::format("{:<16}{:>8}{:>10.1f}\n", to_string(o), counts[o], pct);
    }
    out += fmt::format("{:<16}{:>8}\n", "total", records.size());
    return out;
}

} // namespace slim::evaluation
