#pragma once

#include "slim/core/usage.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slim {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kSnippetCap = 300;

struct TaskInstance {
    std::string id;
    std::string question;
    std::string groundtruth;
    std::optional<std::string> dataset_tag;

    friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct SearchResult {
    std::string title;
    std::string url;
    std::string snippet;

    friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

struct Document {
    std::string url;
    std::string title;
    std::string content;

    friend bool operator==(const Document&, const Document&) = default;
};

enum class SummaryTrigger { Interval, TokenThreshold };

// Knobs governing one run. When summary_token_threshold is set it replaces
// the interval trigger; the interval is then ignored.
struct Budget {
    int max_turns = 150;
    int summary_interval = 50;
    std::optional<int> summary_token_threshold;
    int top_k = 10;
    int browse_char_limit = 10000;

    SummaryTrigger trigger() const {
        return summary_token_threshold ? SummaryTrigger::TokenThreshold : SummaryTrigger::Interval;
    }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const Budget&, const Budget&) = default;
};

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    std::optional<std::string> tool_name;

    static ChatMessage system(std::string text) { return {Role::System, std::move(text), std::nullopt}; }
    static ChatMessage user(std::string text) { return {Role::User, std::move(text), std::nullopt}; }
    static ChatMessage assistant(std::string text) { return {Role::Assistant, std::move(text), std::nullopt}; }
    static ChatMessage tool(std::string name, std::string text) {
        return {Role::Tool, std::move(text), std::move(name)};
    }

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using Context = std::vector<ChatMessage>;

enum class ActionKind { Search, Browse, Summarize, FinalAnswer };

std::string_view to_string(ActionKind kind);
ActionKind action_kind_from_string(std::string_view s);

struct Action {
    ActionKind kind = ActionKind::Search;
    std::string query; // search query, or the browse information need
    std::string url;   // browse target
    std::string text;  // summary text or full final completion

    static Action search(std::string q) { return {ActionKind::Search, std::move(q), {}, {}}; }
    static Action browse(std::string u, std::string q) {
        return {ActionKind::Browse, std::move(q), std::move(u), {}};
    }
    static Action summarize(std::string s) { return {ActionKind::Summarize, {}, {}, std::move(s)}; }
    static Action final_answer(std::string s) { return {ActionKind::FinalAnswer, {}, {}, std::move(s)}; }

    friend bool operator==(const Action&, const Action&) = default;
};

struct Turn {
    int index = 1;
    Action action;
    // Absent for summarize and final-answer turns.
    std::optional<std::string> tool_response;
    bool tool_error = false;
    std::vector<SearchResult> serp;
    TokenUsage usage;     // the LLM call that produced the action
    TokenUsage aux_usage; // LLM calls made while executing the action
    int search_calls = 0;
    int scrape_calls = 0;
    std::string reasoning;

    friend bool operator==(const Turn&, const Turn&) = default;
};

enum class Framework { Slim, React, SearchO1, External };

std::string_view to_string(Framework f);
Framework framework_from_string(std::string_view s);

enum class Outcome { Correct, ExceedContext, ExceedBudget, EarlyStopping, NoToolUsed, MiscError };

std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

// How the agent loop ended; the evaluation module maps this onto Outcome.
enum class Termination { Answered, BudgetExhausted, OverflowFallback, Error };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

struct Trajectory {
    std::string instance_id;
    std::string question;
    std::string groundtruth;
    Framework framework = Framework::Slim;
    Budget budget;
    std::vector<Turn> turns;
    std::vector<Context> context_snapshots;
    std::optional<std::string> final_answer;
    std::optional<std::string> final_output;
    UsageMeter usage_total;
    std::optional<Outcome> outcome;
    Termination termination = Termination::Answered;
    std::string error;
    double wall_time = 0.0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Number of turns charged against the tool budget: searches and browses.
// Summaries and the final answer are exempt.
int budget_consumed(const Trajectory& trajectory);

// Sum of per-turn usage, i.e. what usage_total must equal.
UsageMeter sum_turn_usage(const Trajectory& trajectory);

} // namespace slim
