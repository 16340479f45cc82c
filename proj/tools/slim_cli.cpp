#include "slim/accounting/cost.hpp"
#include "slim/core/json_io.hpp"
#include "slim/harness/commands.hpp"
#include "slim/simenv/corpus.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using slim::json;
using slim::harness::ConfigError;

namespace {

std::set<std::string> split_list(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

struct RunFlags {
    std::string config, out;
    std::string framework, dataset, scorer, chunking, mock_corpus, llm_script, cache_dir, prompt_dir, model,
        grader_model;
    int budget = 0, summary_interval = 0, summary_threshold = 0, top_k = 0, browse_limit = 0, sample = 0,
        concurrency = 0;
    std::int64_t llm_max_context = 0;
    std::uint64_t seed = 0;
};

// Only flags the user actually passed go into the CLI layer.
json cli_layer(const CLI::App& cmd, const RunFlags& f) {
    json layer = json::object();
    auto set = [&](const char* flag, const char* key, auto value) {
        if (cmd.count(flag)) layer[key] = value;
    };
    set("--framework", "framework", f.framework);
    set("--dataset", "dataset", f.dataset);
    set("--budget", "max_turns", f.budget);
    set("--summary-interval", "summary_interval", f.summary_interval);
    set("--summary-threshold", "summary_token_threshold", f.summary_threshold);
    set("--top-k", "top_k", f.top_k);
    set("--browse-limit", "browse_char_limit", f.browse_limit);
    set("--scorer", "scorer", f.scorer);
    set("--chunking", "chunking", f.chunking);
    set("--mock-corpus", "mock_corpus", f.mock_corpus);
    set("--llm-script", "llm_script", f.llm_script);
    set("--llm-max-context", "llm_max_context_tokens", f.llm_max_context);
    set("--cache-dir", "cache_dir", f.cache_dir);
    set("--prompt-dir", "prompt_dir", f.prompt_dir);
    set("--model", "llm_model", f.model);
    set("--grader-model", "grader_model", f.grader_model);
    set("--sample", "sample", f.sample);
    set("--seed", "seed", f.seed);
    set("--concurrency", "concurrency", f.concurrency);
    return layer;
}

int do_run(const CLI::App& cmd, const RunFlags& flags) {
    auto config = slim::harness::resolve_config(flags.config.empty() ? std::nullopt : std::optional(flags.config),
                                                cli_layer(cmd, flags), slim::harness::process_env());
    auto summary = slim::harness::cmd_run(config, flags.out);
    std::cout << fmt::format("{} selected, {} already done, {} run, {} failed\n\n", summary.selected, summary.skipped,
                             summary.completed, summary.failed)
              << summary.outcome_table;
    return summary.exit_code();
}

int do_generate(std::uint64_t seed, int depth, int noise, int count, const fs::path& out) {
    auto bundle = slim::simenv::write_planted_bundle(seed, depth, noise, count, out);
    std::cout << fmt::format("wrote {} tasks, {} pages to {}\n", bundle.tasks.size(), bundle.page_count, out.string());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-horizon web search agents: run, grade, analyze and compare"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Run an agent over a dataset");
    run->add_option("--config", rf.config, "JSON config file (flags and SLIM_* env vars override it)");
    run->add_option("--out", rf.out, "Run directory")->required();
    run->add_option("--framework", rf.framework, "slim | react | search-o1");
    run->add_option("--dataset", rf.dataset, "Dataset JSONL {id, question, answer}");
    run->add_option("--budget", rf.budget, "Tool budget T");
    run->add_option("--summary-interval", rf.summary_interval, "Summarize every N turns (slim)");
    run->add_option("--summary-threshold", rf.summary_threshold, "Summarize above this many context tokens (slim)");
    run->add_option("--top-k", rf.top_k, "Search results per query");
    run->add_option("--browse-limit", rf.browse_limit, "Characters returned per browse");
    run->add_option("--scorer", rf.scorer, "rouge-l | bm25 | token-f1");
    run->add_option("--chunking", rf.chunking, "newline | words");
    run->add_option("--mock-corpus", rf.mock_corpus, "Use a simulated corpus instead of live search");
    run->add_option("--llm-script", rf.llm_script, "Replay a scripted LLM instead of a live provider");
    run->add_option("--llm-max-context", rf.llm_max_context, "Context limit of the scripted LLM (tokens)");
    run->add_option("--cache-dir", rf.cache_dir, "Cache scraped pages here");
    run->add_option("--prompt-dir", rf.prompt_dir, "Override prompt texts");
    run->add_option("--model", rf.model, "LLM model name");
    run->add_option("--grader-model", rf.grader_model, "Model for answer-equivalence grading");
    run->add_option("--sample", rf.sample, "Run a random subset of N instances");
    run->add_option("--seed", rf.seed, "Seed for --sample");
    run->add_option("--concurrency", rf.concurrency, "Trajectories in flight");

    std::string a_dir, a_judge, a_script, a_detectors, a_log, a_prompts, a_out;
    int a_concurrency = 8;
    auto* analyze = app.add_subcommand("analyze", "Classify failure modes of a finished run");
    analyze->add_option("run_dir", a_dir, "Run directory")->required();
    analyze->add_option("--judge", a_judge, "Judge model");
    analyze->add_option("--judge-script", a_script, "Scripted judge responses (JSONL)");
    analyze->add_option("--detectors", a_detectors, "Comma-separated subset of detectors");
    analyze->add_option("--judge-log-dir", a_log, "Write every judge exchange here");
    analyze->add_option("--prompt-dir", a_prompts, "Override prompt texts");
    analyze->add_option("--out", a_out, "Output directory (default: the run directory)");
    analyze->add_option("--concurrency", a_concurrency, "Trajectories in flight");

    std::vector<std::string> r_dirs;
    std::string r_prices, r_csv;
    auto* report = app.add_subcommand("report", "Compare finished runs");
    report->add_option("run_dirs", r_dirs, "Run directories")->required();
    report->add_option("--prices", r_prices, "Prices JSON {model: {token_usd_per_million, ...}}");
    report->add_option("--csv", r_csv, "Also write the table as CSV");

    std::uint64_t g_seed = 1;
    int g_depth = 3, g_noise = 5, g_count = 3;
    std::string g_out;
    auto* simenv = app.add_subcommand("simenv", "Simulated web utilities");
    simenv->require_subcommand(1);
    auto* generate = simenv->add_subcommand("generate", "Write a planted-task corpus, dataset and oracle script");
    generate->add_option("--seed", g_seed, "First seed");
    generate->add_option("--depth", g_depth, "Hops per task");
    generate->add_option("--noise", g_noise, "Noise pages per task");
    generate->add_option("--count", g_count, "Number of tasks");
    generate->add_option("--out", g_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return do_run(*run, rf);
        if (analyze->parsed()) {
            slim::harness::AnalyzeOptions opts;
            auto env = slim::harness::process_env();
            if (!a_judge.empty()) opts.judge_model = a_judge;
            if (!a_script.empty()) opts.judge_script = a_script;
            if (!a_detectors.empty()) opts.detectors = split_list(a_detectors);
            if (!a_log.empty()) opts.judge_log_dir = a_log;
            if (!a_prompts.empty()) opts.prompt_dir = a_prompts;
            if (!a_out.empty()) opts.out_dir = a_out;
            opts.concurrency = a_concurrency;
            if (auto v = env("SLIM_LLM_PROVIDER")) opts.llm_provider = *v;
            if (auto v = env("SLIM_LLM_BASE_URL")) opts.llm_base_url = *v;
            if (auto v = env("SLIM_LLM_API_KEY")) opts.llm_api_key = *v;
            auto result = slim::harness::cmd_analyze(a_dir, opts);
            std::cout << slim::analysis::render_aggregate_text(result.aggregate)
                      << fmt::format("\njudge calls: {}\n", result.judge_calls);
            return 0;
        }
        if (report->parsed()) {
            auto prices = r_prices.empty() ? slim::accounting::PriceTable::defaults()
                                           : slim::accounting::PriceTable::load(r_prices);
            std::vector<fs::path> dirs(r_dirs.begin(), r_dirs.end());
            auto rows = slim::harness::cmd_report(dirs, prices);
            std::cout << slim::harness::render_report_text(rows);
            if (!r_csv.empty()) std::ofstream(r_csv) << slim::harness::render_report_csv(rows);
            return 0;
        }
        if (generate->parsed()) return do_generate(g_seed, g_depth, g_noise, g_count, g_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
