#pragma once

#include "slim/core/prompts.hpp"
#include "slim/core/types.hpp"
#include "slim/llm/judge.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace slim::analysis {

using llm::Verdict;

struct AtomicClaim {
    std::string text;
    bool supported = false;

    friend bool operator==(const AtomicClaim&, const AtomicClaim&) = default;
};

inline constexpr std::size_t kMaxClaims = 10;
inline constexpr std::size_t kResponsesPerBatch = 10;
inline constexpr std::size_t kResponseCharLimit = 4000;

// Judge-based flags are Skipped for trajectories that ended correctly and
// for detectors that were not requested.
struct ErrorReport {
    std::string instance_id;
    Outcome outcome = Outcome::MiscError;
    Verdict confirmation_bias = Verdict::Skipped;
    Verdict unfocused_search = Verdict::Skipped;
    double inefficient_search_pct = 0.0;
    Verdict answer_ignored = Verdict::Skipped;
    Verdict abstention = Verdict::Skipped;
    // Present only for incorrect trajectories that did not abstain and whose
    // claims could be checked.
    std::optional<double> hallucination_rate;
    Verdict hallucination = Verdict::Skipped; // Indeterminate when the pipeline failed
    std::vector<AtomicClaim> claims;
    TokenUsage judge_usage;

    friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

void to_json(nlohmann::json& j, const ErrorReport& r);
void from_json(const nlohmann::json& j, ErrorReport& r);

struct DetectorContext {
    std::string instance_id;
    std::string question;
    std::string groundtruth;
};

// Inputs extracted from a trajectory.
std::vector<std::string> search_queries(const Trajectory& t);
std::vector<std::string> tool_responses(const Trajectory& t);

Verdict detect_confirmation_bias(const std::vector<std::string>& queries, const DetectorContext& ctx,
                                 llm::Judge& judge, const prompts::PromptSet& prompts);
Verdict detect_unfocused_search(const std::vector<std::string>& queries, const DetectorContext& ctx,
                                llm::Judge& judge, const prompts::PromptSet& prompts);

// Share of search calls whose non-empty result set holds only URLs seen in
// earlier results. Each inner vector is the URL list of one search call.
double inefficient_search_pct(const std::vector<std::vector<std::string>>& result_urls);
double inefficient_search_pct(const Trajectory& t);

// Batches of responses, stopping at the first batch judged to contain the
// answer.
Verdict detect_answer_ignored(const std::vector<std::string>& responses, const DetectorContext& ctx,
                              llm::Judge& judge, const prompts::PromptSet& prompts);

// Absent or blank output counts as abstaining without asking the judge.
Verdict detect_abstention(const std::optional<std::string>& final_output, const DetectorContext& ctx,
                          llm::Judge& judge, const prompts::PromptSet& prompts);

// nullopt when the judge never produced a usable list.
std::optional<std::vector<AtomicClaim>> decompose_claims(const std::string& explanation, const DetectorContext& ctx,
                                                         llm::Judge& judge, const prompts::PromptSet& prompts);

// Marks supported claims in place and returns the unsupported share. A claim
// counts as supported once any batch of pages supports it. nullopt when
// claims is empty or the judge output stayed malformed.
std::optional<double> hallucination_rate(std::vector<AtomicClaim>& claims, const std::vector<std::string>& webpages,
                                         const DetectorContext& ctx, llm::Judge& judge,
                                         const prompts::PromptSet& prompts);

inline const std::set<std::string>& all_detectors() {
    static const std::set<std::string> names = {"confirmation_bias", "unfocused_search", "inefficient_search",
                                                "answer_ignored",    "abstention",       "hallucination"};
    return names;
}

struct AnalysisOptions {
    std::set<std::string> detectors = all_detectors();
};

// Judge-based detectors run only for trajectories that did not end Correct.
ErrorReport analyze_trajectory(const Trajectory& t, Outcome outcome, llm::Judge& judge,
                               const prompts::PromptSet& prompts, const AnalysisOptions& options = {});

inline constexpr std::array<const char*, 7> kFailureColumns = {
    "Correct", "Confirm Bias", "Unfocused Search", "Inefficient Search", "Abstention", "Answer Ignored", "Hallucinate"};

struct AggregateRow {
    std::string normalization; // "all_samples" or "incorrect_only"
    double correct = 0.0;
    double confirmation_bias = 0.0;
    double unfocused_search = 0.0;
    double inefficient_search = 0.0;
    double abstention = 0.0;
    double answer_ignored = 0.0;
    double hallucination = 0.0; // mean rate over eligible trajectories
};

struct VerdictCounts {
    int yes = 0, no = 0, indeterminate = 0, skipped = 0;
};

struct AggregateReport {
    std::size_t total = 0;
    std::size_t incorrect = 0;
    std::size_t hallucination_eligible = 0;
    AggregateRow all_samples;
    AggregateRow incorrect_only;
    double hallucination_any_pct = 0.0; // eligible trajectories with rate > 0
    std::map<std::string, VerdictCounts> verdicts;
};

// All figures are percentages. Reports are joined to outcomes by id; a
// report without an outcome throws std::invalid_argument.
AggregateReport aggregate_report(const std::vector<ErrorReport>& reports,
                                 const std::map<std::string, Outcome>& outcomes);

std::string render_aggregate_csv(const AggregateReport& report);
std::string render_aggregate_text(const AggregateReport& report);

} // namespace slim::analysis
