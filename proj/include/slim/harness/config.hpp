#pragma once

#include "slim/agents/agent.hpp"
#include "slim/core/types.hpp"
#include "slim/llm/client.hpp"
#include "slim/llm/scripted.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace slim::harness {

// Bad flags, files or environment. Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Framework framework = Framework::Slim;
    Budget budget;
    toolkit::Scorer scorer = toolkit::Scorer::RougeL;
    toolkit::ChunkingStrategy chunking = toolkit::ChunkingStrategy::ByNewline;
    std::string dataset;

    std::string llm_provider = "openai"; // ignored when llm_script is set
    std::string llm_model = "o3";
    std::string llm_base_url = "https://api.openai.com/v1";
    std::string llm_api_key;
    std::optional<std::string> llm_script;
    std::optional<std::int64_t> llm_max_context_tokens; // scripted provider only
    double requests_per_minute = 0.0;                   // 0: unlimited

    std::string search_provider = "serper"; // ignored when mock_corpus is set
    std::string search_api_key;
    std::optional<std::string> mock_corpus;
    std::optional<std::string> cache_dir;

    std::optional<std::string> prompt_dir;
    std::optional<std::string> grader_model; // tier-2 answer judge, live runs only
    int concurrency = 8;
    std::optional<int> sample;
    std::uint64_t seed = 0;

    // Throws ConfigError.
    void validate() const;
};

// Effective values with secrets left out. Used for the manifest and hash.
nlohmann::json to_manifest_json(const RunConfig& c);

// Applies the keys present in `layer` (same names as the manifest, plus
// llm_api_key / search_api_key). Unknown keys are a ConfigError.
void apply_layer(RunConfig& c, const nlohmann::json& layer);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// SLIM_LLM_PROVIDER, SLIM_LLM_API_KEY, SLIM_LLM_BASE_URL, SLIM_LLM_MODEL,
// SLIM_SEARCH_PROVIDER, SLIM_SEARCH_API_KEY, SLIM_CONCURRENCY.
void apply_env(RunConfig& c, const EnvLookup& env);

// File defaults, then CLI flags, then environment.
RunConfig resolve_config(const std::optional<std::string>& config_file, const nlohmann::json& cli_layer,
                         const EnvLookup& env);

// Search engine and scraper chosen by the config.
struct WebTools {
    std::shared_ptr<toolkit::SearchEngine> search;
    std::shared_ptr<toolkit::Scraper> scraper;
};
WebTools make_web_tools(const RunConfig& c);

// Either a script book or a live client shared by all instances.
class LlmFactory {
public:
    explicit LlmFactory(const RunConfig& c);
    std::shared_ptr<llm::LlmClient> client_for(const std::string& instance_id) const;

private:
    std::optional<llm::ScriptBook> book_;
    std::optional<std::int64_t> max_context_tokens_;
    std::shared_ptr<llm::LlmClient> live_;
};

std::shared_ptr<llm::LlmClient> make_live_client(const std::string& provider, const std::string& model,
                                                 const std::string& base_url, const std::string& api_key,
                                                 double requests_per_minute);

agents::AgentConfig make_agent_config(const RunConfig& c);

} // namespace slim::harness
