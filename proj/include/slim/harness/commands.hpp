#pragma once

#include "slim/accounting/cost.hpp"
#include "slim/analysis/errors.hpp"
#include "slim/harness/config.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace slim::harness {

namespace files {
inline constexpr const char* kTrajectories = "trajectories.jsonl";
inline constexpr const char* kUsage = "usage.jsonl";
inline constexpr const char* kOutcomes = "outcomes.jsonl";
inline constexpr const char* kManifest = "run_manifest.json";
inline constexpr const char* kErrorReports = "error_reports.jsonl";
inline constexpr const char* kErrorSummaryCsv = "error_summary.csv";
inline constexpr const char* kErrorSummaryText = "error_summary.txt";
} // namespace files

struct RunSummary {
    std::size_t selected = 0;  // instances in scope after sampling
    std::size_t skipped = 0;   // already present in the run directory
    std::size_t completed = 0; // newly written
    std::size_t failed = 0;    // newly written and ended in an error
    std::string outcome_table;

    // 0 clean, 2 when some instances failed.
    int exit_code() const { return failed ? 2 : 0; }
};

// Runs every selected instance not already in out_dir and appends the
// results. Throws ConfigError before doing any work when the dataset,
// config or an existing manifest is unusable.
RunSummary cmd_run(const RunConfig& config, const std::filesystem::path& out_dir);

// Dataset indices kept by --sample N --seed S, in dataset order.
std::vector<std::size_t> sample_indices(std::size_t n, std::optional<int> sample, std::uint64_t seed);

struct AnalyzeOptions {
    std::optional<std::string> judge_model;  // live judge
    std::optional<std::string> judge_script; // scripted judge (JSONL)
    std::string llm_provider = "openai";
    std::string llm_base_url = "https://api.openai.com/v1";
    std::string llm_api_key;
    double requests_per_minute = 0.0;
    std::set<std::string> detectors = analysis::all_detectors();
    std::optional<std::filesystem::path> judge_log_dir;
    std::optional<std::filesystem::path> prompt_dir;
    std::optional<std::filesystem::path> out_dir; // defaults to the run directory
    int concurrency = 8;
};

struct AnalyzeResult {
    analysis::AggregateReport aggregate;
    int judge_calls = 0;
    TokenUsage judge_usage;
};

// Writes error_reports.jsonl, error_summary.csv and error_summary.txt.
AnalyzeResult cmd_analyze(const std::filesystem::path& run_dir, const AnalyzeOptions& options);

struct ReportRow {
    std::string run;
    std::size_t instances = 0;
    double score_pct = 0.0;
    double tokens_10k = 0.0; // mean billable tokens / 10,000
    double tool_calls = 0.0; // mean
    double cost_usd = 0.0;   // mean
};

// One row per run, macro-averaged over instances, sorted by score
// (descending, ties keep the given order).
std::vector<ReportRow> cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                                  const accounting::PriceTable& prices);

inline constexpr std::array<const char*, 4> kReportColumns = {"Score", "Tokens", "Tools", "Cost"};

std::string render_report_text(const std::vector<ReportRow>& rows);
std::string render_report_csv(const std::vector<ReportRow>& rows);

} // namespace slim::harness
