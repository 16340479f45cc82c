#pragma once

#include "slim/core/prompts.hpp"
#include "slim/core/types.hpp"
#include "slim/llm/judge.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace slim::evaluation {

enum class Grade { Correct, Incorrect, Indeterminate };

std::string_view to_string(Grade g);
Grade grade_from_string(std::string_view s);

// Lowercase, punctuation removed, articles (a, an, the) dropped, whitespace
// collapsed.
std::string normalize_answer(std::string_view text);

bool exact_match(std::string_view a, std::string_view b);

// Normalized exact match first; if that fails and a judge is given, ask it
// whether the answer is equivalent. A failed judge call is Indeterminate.
Grade grade(const std::optional<std::string>& final_answer, const std::string& groundtruth,
            const std::string& question, llm::Judge* judge, const prompts::PromptSet& prompts,
            const std::string& instance_id = {});

// Priority: Correct, ExceedContext, MiscError, NoToolUsed, ExceedBudget,
// EarlyStopping.
Outcome classify_outcome(const Trajectory& trajectory, Grade grade);

inline constexpr std::array<Outcome, 6> kAllOutcomes = {Outcome::Correct,       Outcome::ExceedContext,
                                                         Outcome::ExceedBudget,  Outcome::EarlyStopping,
                                                         Outcome::NoToolUsed,    Outcome::MiscError};

struct OutcomeRecord {
    std::string instance_id;
    Outcome outcome = Outcome::MiscError;
    Grade grade = Grade::Incorrect;
    std::optional<std::string> final_answer;
    std::string groundtruth;
    std::int64_t tool_calls = 0;
    int budget_consumed = 0;
    Termination termination = Termination::Answered;

    friend bool operator==(const OutcomeRecord&, const OutcomeRecord&) = default;
};

void to_json(nlohmann::json& j, const OutcomeRecord& r);
void from_json(const nlohmann::json& j, OutcomeRecord& r);

OutcomeRecord make_outcome_record(const Trajectory& t, Grade grade);

// Counts and percentages per outcome, as an aligned text table.
std::string render_outcome_summary(const std::vector<OutcomeRecord>& records);

} // namespace slim::evaluation
