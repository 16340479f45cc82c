#include "slim/core/types.hpp"

#include <array>
#include <utility>

namespace slim {

namespace {

template <typename E, std::size_t N>
E lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s,
         const char* what) {
    for (const auto& [value, name] : table) {
        if (name == s) {
            return value;
        }
    }
    throw std::invalid_argument(std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
    for (const auto& [value, name] : table) {
        if (value == v) {
            return name;
        }
    }
    return "?";
}

constexpr std::array<std::pair<Role, std::string_view>, 4> kRoles{{
    {Role::System, "system"},
    {Role::User, "user"},
    {Role::Assistant, "assistant"},
    {Role::Tool, "tool"},
}};

constexpr std::array<std::pair<ActionKind, std::string_view>, 4> kActions{{
    {ActionKind::Search, "search"},
    {ActionKind::Browse, "browse"},
    {ActionKind::Summarize, "summarize"},
    {ActionKind::FinalAnswer, "final_answer"},
}};

constexpr std::array<std::pair<Framework, std::string_view>, 4> kFrameworks{{
    {Framework::Slim, "slim"},
    {Framework::React, "react"},
    {Framework::SearchO1, "search-o1"},
    {Framework::External, "external"},
}};

constexpr std::array<std::pair<Outcome, std::string_view>, 6> kOutcomes{{
    {Outcome::Correct, "correct"},
    {Outcome::ExceedContext, "exceed_context"},
    {Outcome::ExceedBudget, "exceed_budget"},
    {Outcome::EarlyStopping, "early_stopping"},
    {Outcome::NoToolUsed, "no_tool_used"},
    {Outcome::MiscError, "misc_error"},
}};

constexpr std::array<std::pair<Termination, std::string_view>, 4> kTerminations{{
    {Termination::Answered, "answered"},
    {Termination::BudgetExhausted, "budget_exhausted"},
    {Termination::OverflowFallback, "overflow_fallback"},
    {Termination::Error, "error"},
}};

} // namespace

void Budget::validate() const {
    auto require = [](bool ok, const char* field) {
        if (!ok) {
            throw std::invalid_argument(std::string("budget field must be positive: ") + field);
        }
    };
    require(max_turns > 0, "max_turns");
    require(summary_interval > 0, "summary_interval");
    require(!summary_token_threshold || *summary_token_threshold > 0, "summary_token_threshold");
    require(top_k > 0, "top_k");
    require(browse_char_limit > 0, "browse_char_limit");
}

std::string_view to_string(Role r) { return name_of(kRoles, r); }
Role role_from_string(std::string_view s) { return lookup(kRoles, s, "role"); }

std::string_view to_string(ActionKind k) { return name_of(kActions, k); }
ActionKind action_kind_from_string(std::string_view s) { return lookup(kActions, s, "action"); }

std::string_view to_string(Framework f) { return name_of(kFrameworks, f); }
Framework framework_from_string(std::string_view s) { return lookup(kFrameworks, s, "framework"); }

std::string_view to_string(Outcome o) { return name_of(kOutcomes, o); }
Outcome outcome_from_string(std::string_view s) { return lookup(kOutcomes, s, "outcome"); }

std::string_view to_string(Termination t) { return name_of(kTerminations, t); }
Termination termination_from_string(std::string_view s) {
    return lookup(kTerminations, s, "termination");
}

int budget_consumed(const Trajectory& trajectory) {
    int n = 0;
    for (const auto& turn : trajectory.turns) {
        if (turn.action.kind == ActionKind::Search || turn.action.kind == ActionKind::Browse) {
            ++n;
        }
    }
    return n;
}

UsageMeter sum_turn_usage(const Trajectory& trajectory) {
    UsageMeter m;
    for (const auto& turn : trajectory.turns) {
        m.add_tokens(turn.usage);
        m.add_tokens(turn.aux_usage);
        m.search_calls += turn.search_calls;
        m.scrape_calls += turn.scrape_calls;
    }
    return m;
}

} // namespace slim
