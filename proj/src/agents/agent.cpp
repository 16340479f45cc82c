#include "slim/agents/agent.hpp"

#include "slim/core/strings.hpp"

#include <fmt/format.h>

#include <chrono>
#include <regex>
#include <stdexcept>

namespace slim::agents {

using llm::json;

namespace {

constexpr const char* kSearch = "search";
constexpr const char* kBrowse = "browse";
constexpr std::size_t kRecentMessages = 5;

std::string string_arg(const json& args, const char* key) {
    if (args.is_object()) {
        auto it = args.find(key);
        if (it != args.end() && it->is_string()) return it->get<std::string>();
    }
    return {};
}

std::string render_page(const std::string& url, const toolkit::BrowseResult& r) {
    return fmt::format("Page: {}\nURL: {}\nSection {} of {}:\n\n{}", r.title, url, r.chunk_index + 1,
                       r.chunk_count, r.text);
}

std::string render_messages(const Context& ctx, std::size_t last_n) {
    std::size_t start = ctx.size() > last_n ? ctx.size() - last_n : 0;
    std::string out;
    for (std::size_t i = start; i < ctx.size(); ++i) {
        if (!out.empty()) out += "\n\n";
        out += fmt::format("[{}] {}", to_string(ctx[i].role), ctx[i].content);
    }
    return out;
}

class Runner {
public:
    Runner(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm)
        : instance_(instance), config_(config), prompts_(*config.prompts), tools_(tools), llm_(llm) {
        if (config.framework == Framework::Slim) {
            schemas_ = {search_tool_schema(), browse_tool_schema()};
        } else {
            schemas_ = {search_tool_schema()};
        }
    }

    Trajectory run() {
        auto started = std::chrono::steady_clock::now();
        tr_.instance_id = instance_.id;
        tr_.question = instance_.question;
        tr_.groundtruth = instance_.groundtruth;
        tr_.framework = config_.framework;
        tr_.budget = config_.budget;
        ctx_ = initial_context(instance_, config_);
        loop();
        tr_.usage_total = sum_turn_usage(tr_);
        tr_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return std::move(tr_);
    }

private:
    bool slim() const { return config_.framework == Framework::Slim; }

    bool summary_due(int t) const {
        const Budget& b = config_.budget;
        if (b.trigger() == SummaryTrigger::TokenThreshold) {
            return llm::estimate_context_tokens(ctx_) > *b.summary_token_threshold;
        }
        return t % b.summary_interval == 0;
    }

    void loop() {
        const int T = config_.budget.max_turns;
        int t = 1;
        while (t < T) {
            if (slim() && summary_due(t)) {
                if (!summarize(t)) return;
                const auto& tau = config_.budget.summary_token_threshold;
                if (tau && llm::estimate_context_tokens(ctx_) > *tau) {
                    fallback(t, "context exceeds the token threshold after summarization");
                    return;
                }
            }
            auto completion = next_action(t);
            if (!completion) return;
            if (!completion->action.is_tool_call()) {
                answered(t, *completion);
                tr_.termination = Termination::Answered;
                return;
            }
            if (!execute(t, *completion)) return;
            ++t;
        }
        try {
            auto completion = force_final_answer(ctx_, prompts_, llm_);
            answered(t, completion);
            tr_.termination = Termination::BudgetExhausted;
        } catch (const llm::LlmError& e) {
            handle_failure(t, e);
        }
    }

    std::optional<llm::Completion> next_action(int t) {
        try {
            return llm_.complete(ctx_, schemas_);
        } catch (const llm::LlmError& e) {
            if (llm::classify_failure(e) != llm::FailureClass::ContextOverflow || !slim()) {
                handle_failure(t, e);
                return std::nullopt;
            }
        }
        // Overflow in slim: summarize once and retry.
        if (!summarize(t)) return std::nullopt;
        try {
            return llm_.complete(ctx_, schemas_);
        } catch (const llm::LlmError& e) {
            handle_failure(t, e);
            return std::nullopt;
        }
    }

    bool summarize(int t) {
        try {
            Summary s = summarize_context(ctx_, prompts_, llm_);
            Turn turn;
            turn.index = t;
            turn.action = Action::summarize(s.text);
            turn.usage = s.usage;
            tr_.turns.push_back(std::move(turn));
            ctx_ = initial_context(instance_, config_);
            ctx_.push_back(ChatMessage::user(std::move(s.text)));
            tr_.context_snapshots.push_back(ctx_);
            return true;
        } catch (const llm::LlmError& e) {
            handle_failure(t, e);
            return false;
        }
    }

    void handle_failure(int t, const llm::LlmError& e) {
        if (llm::classify_failure(e) == llm::FailureClass::ContextOverflow) {
            fallback(t, e.what());
        } else {
            tr_.termination = Termination::Error;
            tr_.error = e.what();
        }
    }

    // Answer from the bare question with no tools.
    void fallback(int t, const std::string& reason) {
        tr_.termination = Termination::OverflowFallback;
        tr_.error = "context overflow: " + reason;
        try {
            auto completion = force_final_answer(initial_context(instance_, config_), prompts_, llm_);
            answered(t, completion);
        } catch (const llm::LlmError& e) {
            tr_.error += std::string("; fallback answer failed: ") + e.what();
        }
    }

    void answered(int t, const llm::Completion& c) {
        std::string text = c.action.is_tool_call()
                               ? llm::render_tool_call(c.action.tool_call().name, c.action.tool_call().arguments)
                               : c.action.final_text().text;
        Turn turn;
        turn.index = t;
        turn.action = Action::final_answer(text);
        turn.usage = c.usage;
        turn.reasoning = c.action.reasoning;
        tr_.turns.push_back(std::move(turn));
        tr_.final_output = text;
        tr_.final_answer = extract_exact_answer(text);
    }

    // Returns false when the trajectory ended during the turn.
    bool execute(int t, const llm::Completion& c) {
        const llm::ToolCall& call = c.action.tool_call();
        Turn turn;
        turn.index = t;
        turn.usage = c.usage;
        turn.reasoning = c.action.reasoning;
        std::string query = string_arg(call.arguments, "query");
        std::string url = string_arg(call.arguments, "url");
        turn.action = call.name == kBrowse ? Action::browse(url, query) : Action::search(query);

        bool keep_going = true;
        std::string response;
        if (call.parse_error) {
            turn.tool_error = true;
            response = "Error: " + *call.parse_error;
        } else if (call.name == kBrowse) {
            response = do_browse(url, query, turn);
        } else if (trim(query).empty()) {
            turn.tool_error = true;
            response = "Error: search needs a non-empty \"query\" string.";
        } else if (slim()) {
            response = do_search(query, turn);
        } else if (config_.framework == Framework::React) {
            response = do_react_retrieval(query, turn);
        } else {
            keep_going = do_searcho1_retrieval(query, turn, response);
        }

        turn.tool_response = response;
        ctx_.push_back(ChatMessage::assistant(llm::render_tool_call(call.name, call.arguments)));
        ctx_.push_back(ChatMessage::tool(call.name, std::move(response)));
        tr_.turns.push_back(std::move(turn));
        if (!keep_going) {
            handle_failure(t, *pending_error_);
        }
        return keep_going;
    }

    bool run_search(const std::string& query, Turn& turn, std::string& error) {
        turn.search_calls = 1;
        try {
            turn.serp = tools_.search.search(query, config_.budget.top_k);
            return true;
        } catch (const std::runtime_error& e) {
            turn.tool_error = true;
            error = fmt::format("Error: search failed: {}", e.what());
            return false;
        }
    }

    std::string do_search(const std::string& query, Turn& turn) {
        std::string error;
        if (!run_search(query, turn, error)) return error;
        return render_serp(query, turn.serp);
    }

    std::string do_browse(const std::string& url, const std::string& query, Turn& turn) {
        if (trim(url).empty()) {
            turn.tool_error = true;
            return "Error: browse needs a \"url\" string.";
        }
        turn.scrape_calls = 1;
        toolkit::BrowseOptions opts{static_cast<std::size_t>(config_.budget.browse_char_limit), config_.chunking,
                                    config_.scorer};
        try {
            auto result = toolkit::browse(tools_.scraper, url, query, opts);
            return render_page(url, result);
        } catch (const std::runtime_error& e) {
            turn.tool_error = true;
            return fmt::format("Error: could not open {}: {}", url, e.what());
        }
    }

    // Search, then every result page truncated to the browse limit.
    std::string do_react_retrieval(const std::string& query, Turn& turn) {
        std::string error;
        if (!run_search(query, turn, error)) return error;
        if (turn.serp.empty()) return render_serp(query, turn.serp);
        std::string out = fmt::format("Search results for \"{}\":", query);
        for (std::size_t i = 0; i < turn.serp.size(); ++i) {
            const auto& r = turn.serp[i];
            ++turn.scrape_calls;
            std::string body;
            try {
                body = truncate_chars(tools_.scraper.scrape(r.url).content,
                                      static_cast<std::size_t>(config_.budget.browse_char_limit));
            } catch (const std::runtime_error& e) {
                body = fmt::format("Error: could not open page: {}", e.what());
            }
            out += fmt::format("\n\n[{}] {}\nURL: {}\n{}", i + 1, r.title, r.url, body);
        }
        return out;
    }

    // Search, visit every result, then one LLM call condenses the excerpts
    // together with the most recent messages.
    bool do_searcho1_retrieval(const std::string& query, Turn& turn, std::string& response) {
        std::string error;
        if (!run_search(query, turn, error)) {
            response = error;
            return true;
        }
        if (turn.serp.empty()) {
            response = render_serp(query, turn.serp);
            return true;
        }
        std::string documents;
        for (std::size_t i = 0; i < turn.serp.size(); ++i) {
            const auto& r = turn.serp[i];
            ++turn.scrape_calls;
            std::string excerpt;
            try {
                excerpt = toolkit::visit_excerpt(tools_.scraper.scrape(r.url), r.snippet);
            } catch (const std::runtime_error& e) {
                excerpt = fmt::format("[error: could not open page: {}]", e.what());
            }
            if (!documents.empty()) documents += "\n\n";
            documents += fmt::format("[{}] {}\nURL: {}\n{}", i + 1, r.title, r.url, excerpt);
        }
        Context reader{ChatMessage::system(prompts_.get("agent/reader_system")),
                       ChatMessage::user(prompts::fill(prompts_.get("agent/reason_in_document"),
                                                       {{"query", query},
                                                        {"question", instance_.question},
                                                        {"previous-reasoning", render_messages(ctx_, kRecentMessages)},
                                                        {"documents", documents}}))};
        try {
            auto c = llm_.complete(reader, {}, llm::DecodeParams::agent());
            turn.aux_usage = c.usage;
            response = c.action.is_tool_call()
                           ? llm::render_tool_call(c.action.tool_call().name, c.action.tool_call().arguments)
                           : c.action.final_text().text;
            return true;
        } catch (const llm::LlmError& e) {
            turn.tool_error = true;
            response = fmt::format("Error: reading the results failed: {}", e.what());
            pending_error_ = e;
            return false;
        }
    }

    const TaskInstance& instance_;
    const AgentConfig& config_;
    const prompts::PromptSet& prompts_;
    Tools tools_;
    llm::LlmClient& llm_;
    std::vector<llm::ToolSchema> schemas_;
    Trajectory tr_;
    Context ctx_;
    std::optional<llm::LlmError> pending_error_;
};

} // namespace

void AgentConfig::validate() const {
    if (framework == Framework::External) {
        throw std::invalid_argument("framework 'external' cannot be run");
    }
    budget.validate();
    if (!prompts) {
        throw std::invalid_argument("prompts not set");
    }
    for (const char* name : {"agent/task", "agent/summarize", "agent/final_answer", "agent/reader_system",
                             "agent/reason_in_document"}) {
        if (!prompts->contains(name)) {
            throw std::invalid_argument(fmt::format("missing prompt {}", name));
        }
    }
    prompts->get(system_prompt_name(framework));
}

std::string AgentConfig::system_prompt() const { return prompts->get(system_prompt_name(framework)); }

std::string system_prompt_name(Framework f) {
    switch (f) {
    case Framework::Slim: return "agent/system_slim";
    case Framework::React: return "agent/system_react";
    case Framework::SearchO1: return "agent/system_searcho1";
    case Framework::External: break;
    }
    throw std::invalid_argument("no system prompt for this framework");
}

llm::ToolSchema search_tool_schema() {
    return {kSearch, "Search the web. Returns titles, URLs and short snippets of the top results.",
            json{{"type", "object"},
                 {"properties", {{"query", {{"type", "string"}, {"description", "The search query."}}}}},
                 {"required", {"query"}}}};
}

llm::ToolSchema browse_tool_schema() {
    return {kBrowse, "Open a web page and return the section most relevant to the query.",
            json{{"type", "object"},
                 {"properties",
                  {{"url", {{"type", "string"}, {"description", "URL of the page to open."}}},
                   {"query", {{"type", "string"}, {"description", "What you are looking for on the page."}}}}},
                 {"required", {"url", "query"}}}};
}

Context initial_context(const TaskInstance& instance, const AgentConfig& config) {
    return {ChatMessage::system(config.system_prompt()),
            ChatMessage::user(prompts::fill(config.prompts->get("agent/task"), {{"question", instance.question}}))};
}

Summary summarize_context(const Context& context, const prompts::PromptSet& prompts, llm::LlmClient& llm) {
    if (context.empty()) {
        throw std::invalid_argument("cannot summarize an empty context");
    }
    Context request = context;
    request.push_back(ChatMessage::user(prompts.get("agent/summarize")));
    auto c = llm.complete(request, {});
    return {c.action.final_text().text, c.usage};
}

llm::Completion force_final_answer(const Context& context, const prompts::PromptSet& prompts, llm::LlmClient& llm) {
    Context request = context;
    request.push_back(ChatMessage::user(prompts.get("agent/final_answer")));
    return llm.complete(request, {});
}

std::optional<std::string> extract_exact_answer(std::string_view completion) {
    static const std::regex exact(R"(^[\s*_#>-]*exact\s+answer[\s*_]*:[\s*_]*(.*?)[\s*_]*$)", std::regex::icase);
    static const std::regex plain(R"(^[\s*_#>-]*answer[\s*_]*:[\s*_]*(.*?)[\s*_]*$)", std::regex::icase);
    std::optional<std::string> exact_hit, plain_hit;
    std::size_t pos = 0;
    while (pos <= completion.size()) {
        std::size_t end = completion.find('\n', pos);
        if (end == std::string_view::npos) end = completion.size();
        std::string line(completion.substr(pos, end - pos));
        std::smatch m;
        if (std::regex_match(line, m, exact)) {
            exact_hit = m[1].str();
        } else if (std::regex_match(line, m, plain)) {
            plain_hit = m[1].str();
        }
        pos = end + 1;
    }
    std::string answer = exact_hit ? *exact_hit : plain_hit ? *plain_hit : std::string(completion);
    answer = trim(answer);
    if (answer.empty()) return std::nullopt;
    return answer;
}

std::string render_serp(std::string_view query, const std::vector<SearchResult>& results) {
    if (results.empty()) {
        return fmt::format("No results found for \"{}\".", query);
    }
    std::string out = fmt::format("Search results for \"{}\":", query);
    for (std::size_t i = 0; i < results.size(); ++i) {
        out += fmt::format("\n\n[{}] {}\nURL: {}\n{}", i + 1, results[i].title, results[i].url, results[i].snippet);
    }
    return out;
}

Trajectory run_slim(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm) {
    AgentConfig c = config;
    c.framework = Framework::Slim;
    c.validate();
    return Runner(instance, c, tools, llm).run();
}

Trajectory run_react(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm) {
    AgentConfig c = config;
    c.framework = Framework::React;
    c.validate();
    return Runner(instance, c, tools, llm).run();
}

Trajectory run_searcho1(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm) {
    AgentConfig c = config;
    c.framework = Framework::SearchO1;
    c.validate();
    return Runner(instance, c, tools, llm).run();
}

Trajectory run_agent(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm) {
    switch (config.framework) {
    case Framework::Slim: return run_slim(instance, config, tools, llm);
    case Framework::React: return run_react(instance, config, tools, llm);
    case Framework::SearchO1: return run_searcho1(instance, config, tools, llm);
    case Framework::External: break;
    }
    throw std::invalid_argument("framework 'external' cannot be run");
}

} // namespace slim::agents
