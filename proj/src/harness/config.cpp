#include "slim/harness/config.hpp"

#include "slim/core/json_io.hpp"
#include "slim/llm/openai.hpp"
#include "slim/simenv/corpus.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace slim::harness {
namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config value '" + key + "' has the wrong type");
    }
}

template <typename T>
std::optional<T> get_opt(const json& v, const std::string& key) {
    if (v.is_null()) return std::nullopt;
    return get_as<T>(v, key);
}

json opt(const auto& o) { return o ? json(*o) : json(nullptr); }

int parse_int(const std::string& s, const std::string& name) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(name + " must be an integer, got '" + s + "'");
    }
}

} // namespace

void RunConfig::validate() const {
    try {
        budget.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (framework == Framework::External) throw ConfigError("framework 'external' cannot be run");
    if (dataset.empty()) throw ConfigError("no dataset given");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (sample && *sample < 1) throw ConfigError("sample must be >= 1");
    if (requests_per_minute < 0) throw ConfigError("requests_per_minute must be >= 0");
    if (!llm_script) {
        if (llm_provider != "openai") throw ConfigError("unknown llm provider '" + llm_provider + "'");
        if (llm_api_key.empty()) throw ConfigError("no LLM API key (set SLIM_LLM_API_KEY) and no --llm-script");
    }
    if (!mock_corpus) {
        if (search_provider != "serper") throw ConfigError("unknown search provider '" + search_provider + "'");
        if (search_api_key.empty()) {
            throw ConfigError("no search API key (set SLIM_SEARCH_API_KEY) and no --mock-corpus");
        }
    }
}

json to_manifest_json(const RunConfig& c) {
    return json{{"framework", to_string(c.framework)},
                {"budget", c.budget},
                {"scorer", to_string(c.scorer)},
                {"chunking", to_string(c.chunking)},
                {"dataset", c.dataset},
                {"llm_provider", c.llm_script ? "scripted" : c.llm_provider},
                {"llm_model", c.llm_model},
                {"llm_base_url", c.llm_base_url},
                {"llm_script", opt(c.llm_script)},
                {"llm_max_context_tokens", opt(c.llm_max_context_tokens)},
                {"requests_per_minute", c.requests_per_minute},
                {"search_provider", c.mock_corpus ? "mock" : c.search_provider},
                {"mock_corpus", opt(c.mock_corpus)},
                {"cache_dir", opt(c.cache_dir)},
                {"prompt_dir", opt(c.prompt_dir)},
                {"grader_model", opt(c.grader_model)},
                {"concurrency", c.concurrency},
                {"sample", opt(c.sample)},
                {"seed", c.seed}};
}

void apply_layer(RunConfig& c, const json& layer) {
    if (!layer.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, v] : layer.items()) {
        try {
            if (key == "framework") c.framework = framework_from_string(get_as<std::string>(v, key));
            else if (key == "budget") c.budget = get_as<Budget>(v, key);
            else if (key == "max_turns") c.budget.max_turns = get_as<int>(v, key);
            else if (key == "summary_interval") c.budget.summary_interval = get_as<int>(v, key);
            else if (key == "summary_token_threshold") c.budget.summary_token_threshold = get_opt<int>(v, key);
            else if (key == "top_k") c.budget.top_k = get_as<int>(v, key);
            else if (key == "browse_char_limit") c.budget.browse_char_limit = get_as<int>(v, key);
            else if (key == "scorer") c.scorer = toolkit::scorer_from_string(get_as<std::string>(v, key));
            else if (key == "chunking") c.chunking = toolkit::chunking_from_string(get_as<std::string>(v, key));
            else if (key == "dataset") c.dataset = get_as<std::string>(v, key);
            else if (key == "llm_provider") c.llm_provider = get_as<std::string>(v, key);
            else if (key == "llm_model") c.llm_model = get_as<std::string>(v, key);
            else if (key == "llm_base_url") c.llm_base_url = get_as<std::string>(v, key);
            else if (key == "llm_api_key") c.llm_api_key = get_as<std::string>(v, key);
            else if (key == "llm_script") c.llm_script = get_opt<std::string>(v, key);
            else if (key == "llm_max_context_tokens") c.llm_max_context_tokens = get_opt<std::int64_t>(v, key);
            else if (key == "requests_per_minute") c.requests_per_minute = get_as<double>(v, key);
            else if (key == "search_provider") c.search_provider = get_as<std::string>(v, key);
            else if (key == "search_api_key") c.search_api_key = get_as<std::string>(v, key);
            else if (key == "mock_corpus") c.mock_corpus = get_opt<std::string>(v, key);
            else if (key == "cache_dir") c.cache_dir = get_opt<std::string>(v, key);
            else if (key == "prompt_dir") c.prompt_dir = get_opt<std::string>(v, key);
            else if (key == "grader_model") c.grader_model = get_opt<std::string>(v, key);
            else if (key == "concurrency") c.concurrency = get_as<int>(v, key);
            else if (key == "sample") c.sample = get_opt<int>(v, key);
            else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config value '" + key + "': " + e.what());
        }
    }
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
}

void apply_env(RunConfig& c, const EnvLookup& env) {
    if (auto v = env("SLIM_LLM_PROVIDER")) c.llm_provider = *v;
    if (auto v = env("SLIM_LLM_API_KEY")) c.llm_api_key = *v;
    if (auto v = env("SLIM_LLM_BASE_URL")) c.llm_base_url = *v;
    if (auto v = env("SLIM_LLM_MODEL")) c.llm_model = *v;
    if (auto v = env("SLIM_SEARCH_PROVIDER")) c.search_provider = *v;
    if (auto v = env("SLIM_SEARCH_API_KEY")) c.search_api_key = *v;
    if (auto v = env("SLIM_CONCURRENCY")) c.concurrency = parse_int(*v, "SLIM_CONCURRENCY");
}

RunConfig resolve_config(const std::optional<std::string>& config_file, const json& cli_layer, const EnvLookup& env) {
    RunConfig c;
    if (config_file) {
        std::ifstream in(*config_file);
        if (!in) throw ConfigError("cannot read config file " + *config_file);
        std::stringstream ss;
        ss << in.rdbuf();
        json file = json::parse(ss.str(), nullptr, false);
        if (file.is_discarded()) throw ConfigError("config file " + *config_file + " is not valid JSON");
        apply_layer(c, file);
    }
    apply_layer(c, cli_layer);
    apply_env(c, env);
    return c;
}

WebTools make_web_tools(const RunConfig& c) {
    WebTools tools;
    if (c.mock_corpus) {
        std::shared_ptr<const simenv::Corpus> corpus;
        try {
            corpus = std::make_shared<const simenv::Corpus>(simenv::Corpus::load(*c.mock_corpus));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("cannot load mock corpus: ") + e.what());
        }
        tools.search = std::make_shared<simenv::MockSearchEngine>(corpus);
        tools.scraper = std::make_shared<simenv::MockScraper>(corpus);
        return tools;
    }
    tools.search = std::make_shared<toolkit::SerperSearch>(toolkit::SerperConfig{c.search_api_key});
    std::shared_ptr<toolkit::Scraper> scraper = std::make_shared<toolkit::HttpScraper>();
    if (c.cache_dir) scraper = std::make_shared<toolkit::CachingScraper>(scraper, *c.cache_dir);
    tools.scraper = scraper;
    return tools;
}

std::shared_ptr<llm::LlmClient> make_live_client(const std::string& provider, const std::string& model,
                                                 const std::string& base_url, const std::string& api_key,
                                                 double requests_per_minute) {
    if (provider != "openai") throw ConfigError("unknown llm provider '" + provider + "'");
    llm::OpenAiConfig oc;
    oc.base_url = base_url;
    oc.api_key = api_key;
    oc.model = model;
    if (requests_per_minute > 0) oc.limiter = std::make_shared<llm::RateLimiter>(requests_per_minute);
    return std::make_shared<llm::OpenAiClient>(oc);
}

LlmFactory::LlmFactory(const RunConfig& c) : max_context_tokens_(c.llm_max_context_tokens) {
    if (c.llm_script) {
        try {
            book_ = llm::ScriptBook::load(*c.llm_script);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("cannot load llm script: ") + e.what());
        }
    } else {
        live_ = make_live_client(c.llm_provider, c.llm_model, c.llm_base_url, c.llm_api_key, c.requests_per_minute);
    }
}

std::shared_ptr<llm::LlmClient> LlmFactory::client_for(const std::string& instance_id) const {
    if (book_) return book_->client_for(instance_id, max_context_tokens_);
    return live_;
}

agents::AgentConfig make_agent_config(const RunConfig& c) {
    agents::AgentConfig a;
    a.framework = c.framework;
    a.budget = c.budget;
    a.scorer = c.scorer;
    a.chunking = c.chunking;
    if (c.prompt_dir) {
        try {
            a.prompts = std::make_shared<prompts::PromptSet>(prompts::PromptSet::with_overrides(*c.prompt_dir));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return a;
}

} // namespace slim::harness
