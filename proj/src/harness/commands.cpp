#include "slim/harness/commands.hpp"

#include "slim/core/hash.hpp"
#include "slim/core/json_io.hpp"
#include "slim/evaluation/grading.hpp"
#include "slim/harness/pool.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace slim::harness {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

// Drops a trailing partial line left by an interrupted run.
void repair_jsonl(const fs::path& p) {
    if (!fs::exists(p)) return;
    std::string text = read_file(p);
    if (text.empty() || text.back() == '\n') return;
    auto cut = text.rfind('\n');
    fs::resize_file(p, cut == std::string::npos ? 0 : cut + 1);
}

std::set<std::string> completed_ids(const fs::path& outcomes) {
    std::set<std::string> ids;
    if (!fs::exists(outcomes)) return ids;
    for (const auto& j : read_jsonl(outcomes)) ids.insert(j.at("instance_id").get<std::string>());
    return ids;
}

json usage_line(const Trajectory& t) {
    const UsageMeter& u = t.usage_total;
    return json{{"instance_id", t.instance_id},
                {"input_tokens", u.input_tokens},
                {"cached_input_tokens", u.cached_input_tokens},
                {"output_tokens", u.output_tokens},
                {"search_calls", u.search_calls},
                {"scrape_calls", u.scrape_calls},
                {"billable_tokens", accounting::billable_tokens(u)},
                {"tool_calls", accounting::tool_call_count(t)}};
}

struct InstanceResult {
    std::string trajectory;
    std::string usage;
    std::string outcome;
    bool failed = false;
};

} // namespace

std::vector<std::size_t> sample_indices(std::size_t n, std::optional<int> sample, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (!sample || static_cast<std::size_t>(*sample) >= n) return idx;
    // Fisher-Yates on raw engine output so the subset is the same with every
    // standard library.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(idx[i], idx[rng() % (i + 1)]);
    }
    idx.resize(static_cast<std::size_t>(*sample));
    std::sort(idx.begin(), idx.end());
    return idx;
}

RunSummary cmd_run(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    std::vector<TaskInstance> dataset;
    try {
        dataset = read_dataset(config.dataset);
    } catch (const DatasetError& e) {
        throw ConfigError(std::string("malformed dataset: ") + e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    agents::AgentConfig agent = make_agent_config(config);
    WebTools tools = make_web_tools(config);
    LlmFactory llms(config);
    std::shared_ptr<llm::LlmClient> grader;
    if (config.grader_model && !config.llm_script) {
        grader = make_live_client(config.llm_provider, *config.grader_model, config.llm_base_url, config.llm_api_key,
                                  config.requests_per_minute);
    }

    json manifest_config = to_manifest_json(config);
    json manifest{{"schema_version", kSchemaVersion},
                  {"config", manifest_config},
                  {"config_sha256", sha256_hex(manifest_config.dump())},
                  {"prompt_sha256", agent.prompts->hashes()},
                  {"dataset_sha256", sha256_hex(read_file(config.dataset))},
                  {"seed", config.seed}};
    fs::create_directories(out_dir);
    fs::path manifest_path = out_dir / files::kManifest;
    if (fs::exists(manifest_path)) {
        json existing = json::parse(read_file(manifest_path), nullptr, false);
        if (existing.is_discarded() || existing.value("config_sha256", "") != manifest["config_sha256"] ||
            existing.value("dataset_sha256", "") != manifest["dataset_sha256"]) {
            throw ConfigError("run directory " + out_dir.string() + " holds a run with a different configuration");
        }
    } else {
        write_file(manifest_path, manifest.dump(2) + "\n");
    }

    for (const char* f : {files::kTrajectories, files::kUsage, files::kOutcomes}) repair_jsonl(out_dir / f);
    std::set<std::string> done = completed_ids(out_dir / files::kOutcomes);

    RunSummary summary;
    std::vector<const TaskInstance*> todo;
    for (std::size_t i : sample_indices(dataset.size(), config.sample, config.seed)) {
        ++summary.selected;
        if (done.count(dataset[i].id)) {
            ++summary.skipped;
        } else {
            todo.push_back(&dataset[i]);
        }
    }

    std::ofstream traj_out(out_dir / files::kTrajectories, std::ios::app | std::ios::binary);
    std::ofstream usage_out(out_dir / files::kUsage, std::ios::app | std::ios::binary);
    std::ofstream outcome_out(out_dir / files::kOutcomes, std::ios::app | std::ios::binary);

    auto produce = [&](std::size_t i) {
        const TaskInstance& inst = *todo[i];
        auto client = llms.client_for(inst.id);
        Trajectory t;
        bool failed = false;
        try {
            t = agents::run_agent(inst, agent, {*tools.search, *tools.scraper}, *client);
        } catch (const std::exception& e) {
            t = Trajectory{};
            t.instance_id = inst.id;
            t.question = inst.question;
            t.groundtruth = inst.groundtruth;
            t.framework = config.framework;
            t.budget = config.budget;
            t.termination = Termination::Error;
            t.error = e.what();
            failed = true;
        }
        std::optional<llm::Judge> judge;
        if (grader) judge.emplace(*grader);
        auto grade = evaluation::grade(t.final_answer, inst.groundtruth, inst.question, judge ? &*judge : nullptr,
                                       *agent.prompts, inst.id);
        auto record = evaluation::make_outcome_record(t, grade);
        t.outcome = record.outcome;
        failed = failed || t.termination == Termination::Error;
        return InstanceResult{trajectory_to_line(t), usage_line(t).dump(), json(record).dump(), failed};
    };
    auto consume = [&](std::size_t, InstanceResult r) {
        traj_out << r.trajectory << '\n';
        usage_out << r.usage << '\n';
        outcome_out << r.outcome << '\n';
        traj_out.flush();
        usage_out.flush();
        outcome_out.flush();
        ++summary.completed;
        if (r.failed) ++summary.failed;
    };
    ordered_parallel_map<InstanceResult>(todo.size(), config.concurrency, produce, consume);

    std::vector<evaluation::OutcomeRecord> all;
    for (const auto& j : read_jsonl(out_dir / files::kOutcomes)) all.push_back(j.get<evaluation::OutcomeRecord>());
    summary.outcome_table = evaluation::render_outcome_summary(all);
    return summary;
}

AnalyzeResult cmd_analyze(const fs::path& run_dir, const AnalyzeOptions& options) {
    fs::path traj_path = run_dir / files::kTrajectories;
    fs::path outcome_path = run_dir / files::kOutcomes;
    if (!fs::exists(traj_path)) throw ConfigError("no " + std::string(files::kTrajectories) + " in " + run_dir.string());
    if (!fs::exists(outcome_path)) throw ConfigError("no " + std::string(files::kOutcomes) + " in " + run_dir.string());
    for (const auto& d : options.detectors) {
        if (!analysis::all_detectors().count(d)) throw ConfigError("unknown detector '" + d + "'");
    }

    std::map<std::string, Outcome> outcomes;
    for (const auto& j : read_jsonl(outcome_path)) {
        auto r = j.get<evaluation::OutcomeRecord>();
        outcomes[r.instance_id] = r.outcome;
    }
    std::vector<Trajectory> trajectories = read_trajectories(traj_path);
    for (const auto& t : trajectories) {
        if (!outcomes.count(t.instance_id)) throw ConfigError("no outcome recorded for instance " + t.instance_id);
    }

    bool needs_judge = std::any_of(options.detectors.begin(), options.detectors.end(),
                                   [](const std::string& d) { return d != "inefficient_search"; });
    std::optional<llm::ScriptBook> book;
    std::shared_ptr<llm::LlmClient> live;
    if (options.judge_script) {
        try {
            book = llm::ScriptBook::load(*options.judge_script);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("cannot load judge script: ") + e.what());
        }
    } else if (options.judge_model) {
        if (options.llm_api_key.empty()) throw ConfigError("no API key for the judge (set SLIM_LLM_API_KEY)");
        live = make_live_client(options.llm_provider, *options.judge_model, options.llm_base_url, options.llm_api_key,
                                options.requests_per_minute);
    } else if (needs_judge) {
        throw ConfigError("the selected detectors need --judge or --judge-script");
    }
    prompts::PromptSet prompt_set =
        options.prompt_dir ? prompts::PromptSet::with_overrides(*options.prompt_dir) : prompts::PromptSet{};
    std::optional<llm::JudgeLog> log;
    if (options.judge_log_dir) log.emplace(*options.judge_log_dir);
    analysis::AnalysisOptions analysis_options{options.detectors};

    struct Analyzed {
        analysis::ErrorReport report;
        int calls = 0;
    };
    fs::path out_dir = options.out_dir.value_or(run_dir);
    fs::create_directories(out_dir);
    std::ofstream reports_out(out_dir / files::kErrorReports, std::ios::trunc | std::ios::binary);
    AnalyzeResult result;
    std::vector<analysis::ErrorReport> reports;

    auto produce = [&](std::size_t i) {
        const Trajectory& t = trajectories[i];
        std::shared_ptr<llm::LlmClient> client =
            book ? book->client_for(t.instance_id) : live ? live : std::make_shared<llm::ScriptedLlm>(
                                                                       std::vector<llm::ScriptEntry>{});
        llm::Judge judge(*client, log ? &*log : nullptr);
        auto report = analysis::analyze_trajectory(t, outcomes.at(t.instance_id), judge, prompt_set, analysis_options);
        return Analyzed{std::move(report), judge.calls()};
    };
    auto consume = [&](std::size_t, Analyzed a) {
        reports_out << json(a.report).dump() << '\n';
        result.judge_calls += a.calls;
        result.judge_usage += a.report.judge_usage;
        reports.push_back(std::move(a.report));
    };
    ordered_parallel_map<Analyzed>(trajectories.size(), options.concurrency, produce, consume);

    result.aggregate = analysis::aggregate_report(reports, outcomes);
    write_file(out_dir / files::kErrorSummaryCsv, analysis::render_aggregate_csv(result.aggregate));
    write_file(out_dir / files::kErrorSummaryText, analysis::render_aggregate_text(result.aggregate));
    return result;
}

std::vector<ReportRow> cmd_report(const std::vector<fs::path>& run_dirs, const accounting::PriceTable& prices) {
    if (run_dirs.empty()) throw ConfigError("no run directories given");
    std::vector<ReportRow> rows;
    for (const auto& dir : run_dirs) {
        for (const char* f : {files::kManifest, files::kUsage, files::kOutcomes}) {
            if (!fs::exists(dir / f)) throw ConfigError("no " + std::string(f) + " in " + dir.string());
        }
        json manifest = json::parse(read_file(dir / files::kManifest));
        std::string model = manifest.at("config").value("llm_model", "o3");
        const accounting::CostModel& price = prices.at(model);

        std::map<std::string, Outcome> outcomes;
        for (const auto& j : read_jsonl(dir / files::kOutcomes)) {
            outcomes[j.at("instance_id").get<std::string>()] = outcome_from_string(j.at("outcome").get<std::string>());
        }
        ReportRow row;
        row.run = fs::path(dir).lexically_normal().filename().string();
        if (row.run.empty()) row.run = fs::path(dir).lexically_normal().parent_path().filename().string();
        std::int64_t billable = 0, tools = 0;
        accounting::Picos cost = 0;
        std::size_t correct = 0;
        for (const auto& j : read_jsonl(dir / files::kUsage)) {
            UsageMeter u{j.at("input_tokens"), j.at("cached_input_tokens"), j.at("output_tokens"),
                         j.at("search_calls"), j.at("scrape_calls")};
            std::string id = j.at("instance_id");
            auto it = outcomes.find(id);
            if (it == outcomes.end()) throw ConfigError("usage without outcome for instance " + id);
            ++row.instances;
            correct += it->second == Outcome::Correct;
            billable += accounting::billable_tokens(u);
            tools += u.search_calls + u.scrape_calls;
            cost += accounting::total_cost(u, price);
        }
        if (row.instances) {
            double n = static_cast<double>(row.instances);
            row.score_pct = 100.0 * static_cast<double>(correct) / n;
            row.tokens_10k = static_cast<double>(billable) / n / 10000.0;
            row.tool_calls = static_cast<double>(tools) / n;
            row.cost_usd = accounting::to_usd(cost) / n;
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.score_pct > b.score_pct; });
    return rows;
}

std::string render_report_text(const std::vector<ReportRow>& rows) {
    std::size_t width = 3;
    for (const auto& r : rows) width = std::max(width, r.run.size());
    std::string out = fmt::format("{:<{}}  {:>9}  {:>8}  {:>8}  {:>8}  {:>8}\n", "Run", width, "Instances",
                                  kReportColumns[0], kReportColumns[1], kReportColumns[2], kReportColumns[3]);
    for (const auto& r : rows) {
        out += fmt::format("{:<{}}  {:>9}  {:>8.1f}  {:>8.1f}  {:>8.1f}  {:>8.2f}\n", r.run, width, r.instances,
                           r.score_pct, r.tokens_10k, r.tool_calls, r.cost_usd);
    }
    out += "(Tokens in 10,000s; Cost in USD; means over instances)\n";
    return out;
}

std::string render_report_csv(const std::vector<ReportRow>& rows) {
    std::string out = fmt::format("Run,Instances,{},{},{},{}\n", kReportColumns[0], kReportColumns[1],
                                  kReportColumns[2], kReportColumns[3]);
    for (const auto& r : rows) {
        out += fmt::format("{},{},{:.1f},{:.1f},{:.1f},{:.2f}\n", r.run, r.instances, r.score_pct, r.tokens_10k,
                           r.tool_calls, r.cost_usd);
    }
    return out;
}

} // namespace slim::harness
