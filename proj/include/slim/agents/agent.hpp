#pragma once

#include "slim/core/prompts.hpp"
#include "slim/core/types.hpp"
#include "slim/llm/client.hpp"
#include "slim/toolkit/browse.hpp"
#include "slim/toolkit/web.hpp"

#include <memory>
#include <string>
#include <vector>

namespace slim::agents {

struct AgentConfig {
    Framework framework = Framework::Slim;
    Budget budget;
    std::shared_ptr<const prompts::PromptSet> prompts = std::make_shared<prompts::PromptSet>();
    toolkit::Scorer scorer = toolkit::Scorer::RougeL;
    toolkit::ChunkingStrategy chunking = toolkit::ChunkingStrategy::ByNewline;

    // Throws std::invalid_argument. Summary settings only matter for slim.
    void validate() const;

    std::string system_prompt() const;
};

std::string system_prompt_name(Framework f);

struct Tools {
    toolkit::SearchEngine& search;
    toolkit::Scraper& scraper;
};

// Tool schemas declared to the LLM.
llm::ToolSchema search_tool_schema();
llm::ToolSchema browse_tool_schema();

// Turn loops. Each returns a complete trajectory (outcome not yet set).
// Provider failures end the trajectory instead of throwing; a ScriptExhausted
// from a scripted client does propagate.
Trajectory run_slim(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm);
Trajectory run_react(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm);
Trajectory run_searcho1(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm);
// Dispatches on config.framework.
Trajectory run_agent(const TaskInstance& instance, const AgentConfig& config, Tools tools, llm::LlmClient& llm);

// Starting context: system prompt and the task message.
Context initial_context(const TaskInstance& instance, const AgentConfig& config);

struct Summary {
    std::string text;
    TokenUsage usage;
};

// One LLM call over the whole context plus the summarize instruction, with
// no tools declared. Propagates llm::LlmError.
Summary summarize_context(const Context& context, const prompts::PromptSet& prompts, llm::LlmClient& llm);

// One LLM call asking for the answer with no tools declared.
llm::Completion force_final_answer(const Context& context, const prompts::PromptSet& prompts, llm::LlmClient& llm);

// The text after the last "Exact Answer:" line (or failing that an
// "Answer:" line); otherwise the whole completion, trimmed. nullopt when
// nothing is left.
std::optional<std::string> extract_exact_answer(std::string_view completion);

// Renderings of tool output as placed in the context.
std::string render_serp(std::string_view query, const std::vector<SearchResult>& results);

} // namespace slim::agents
