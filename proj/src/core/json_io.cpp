#include "slim/core/json_io.hpp"

#include <fstream>
#include <set>

namespace slim {

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        v = it->get<T>();
    } else {
        v.reset();
    }
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        return it->get<T>();
    }
    return fallback;
}

} // namespace

void to_json(json& j, const TaskInstance& v) {
    j = json{{"id", v.id}, {"question", v.question}, {"answer", v.groundtruth}};
    if (v.dataset_tag) {
        j["dataset_tag"] = *v.dataset_tag;
    }
}

void from_json(const json& j, TaskInstance& v) {
    v.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    v.question = j.at("question").get<std::string>();
    v.groundtruth = j.at("answer").is_string() ? j.at("answer").get<std::string>() : j.at("answer").dump();
    get_optional(j, "dataset_tag", v.dataset_tag);
}

void to_json(json& j, const SearchResult& v) {
    j = json{{"title", v.title}, {"url", v.url}, {"snippet", v.snippet}};
}

void from_json(const json& j, SearchResult& v) {
    v.title = value_or<std::string>(j, "title", "");
    v.url = j.at("url").get<std::string>();
    v.snippet = value_or<std::string>(j, "snippet", "");
}

void to_json(json& j, const Document& v) {
    j = json{{"url", v.url}, {"title", v.title}, {"content", v.content}};
}

void from_json(const json& j, Document& v) {
    v.url = j.at("url").get<std::string>();
    v.title = value_or<std::string>(j, "title", "");
    v.content = value_or<std::string>(j, "content", "");
}

void to_json(json& j, const Budget& v) {
    j = json{{"max_turns", v.max_turns},
             {"summary_interval", v.summary_interval},
             {"top_k", v.top_k},
             {"browse_char_limit", v.browse_char_limit}};
    put_optional(j, "summary_token_threshold", v.summary_token_threshold);
}

void from_json(const json& j, Budget& v) {
    Budget d;
    v.max_turns = value_or(j, "max_turns", d.max_turns);
    v.summary_interval = value_or(j, "summary_interval", d.summary_interval);
    get_optional(j, "summary_token_threshold", v.summary_token_threshold);
    v.top_k = value_or(j, "top_k", d.top_k);
    v.browse_char_limit = value_or(j, "browse_char_limit", d.browse_char_limit);
}

void to_json(json& j, const TokenUsage& v) {
    j = json{{"input_tokens", v.input_tokens},
             {"cached_input_tokens", v.cached_input_tokens},
             {"output_tokens", v.output_tokens}};
}

void from_json(const json& j, TokenUsage& v) {
    v.input_tokens = value_or<std::int64_t>(j, "input_tokens", 0);
    v.cached_input_tokens = value_or<std::int64_t>(j, "cached_input_tokens", 0);
    v.output_tokens = value_or<std::int64_t>(j, "output_tokens", 0);
}

void to_json(json& j, const UsageMeter& v) {
    j = json{{"input_tokens", v.input_tokens},
             {"cached_input_tokens", v.cached_input_tokens},
             {"output_tokens", v.output_tokens},
             {"search_calls", v.search_calls},
             {"scrape_calls", v.scrape_calls}};
}

void from_json(const json& j, UsageMeter& v) {
    v.input_tokens = value_or<std::int64_t>(j, "input_tokens", 0);
    v.cached_input_tokens = value_or<std::int64_t>(j, "cached_input_tokens", 0);
    v.output_tokens = value_or<std::int64_t>(j, "output_tokens", 0);
    v.search_calls = value_or<std::int64_t>(j, "search_calls", 0);
    v.scrape_calls = value_or<std::int64_t>(j, "scrape_calls", 0);
}

void to_json(json& j, const ChatMessage& v) {
    j = json{{"role", to_string(v.role)}, {"content", v.content}};
    if (v.tool_name) {
        j["tool_name"] = *v.tool_name;
    }
}

void from_json(const json& j, ChatMessage& v) {
    v.role = role_from_string(j.at("role").get<std::string>());
    v.content = value_or<std::string>(j, "content", "");
    get_optional(j, "tool_name", v.tool_name);
}

void to_json(json& j, const Action& v) {
    j = json{{"kind", to_string(v.kind)}};
    if (!v.query.empty() || v.kind == ActionKind::Search || v.kind == ActionKind::Browse) {
        j["query"] = v.query;
    }
    if (!v.url.empty() || v.kind == ActionKind::Browse) {
        j["url"] = v.url;
    }
    if (!v.text.empty() || v.kind == ActionKind::Summarize || v.kind == ActionKind::FinalAnswer) {
        j["text"] = v.text;
    }
}

void from_json(const json& j, Action& v) {
    v.kind = action_kind_from_string(j.at("kind").get<std::string>());
    v.query = value_or<std::string>(j, "query", "");
    v.url = value_or<std::string>(j, "url", "");
    v.text = value_or<std::string>(j, "text", "");
}

void to_json(json& j, const Turn& v) {
    j = json{{"index", v.index},
             {"action", v.action},
             {"tool_error", v.tool_error},
             {"serp", v.serp},
             {"usage", v.usage},
             {"aux_usage", v.aux_usage},
             {"search_calls", v.search_calls},
             {"scrape_calls", v.scrape_calls},
             {"reasoning", v.reasoning}};
    put_optional(j, "tool_response", v.tool_response);
}

void from_json(const json& j, Turn& v) {
    v.index = j.at("index").get<int>();
    v.action = j.at("action").get<Action>();
    get_optional(j, "tool_response", v.tool_response);
    v.tool_error = value_or(j, "tool_error", false);
    v.serp = value_or<std::vector<SearchResult>>(j, "serp", {});
    v.usage = value_or<TokenUsage>(j, "usage", {});
    v.aux_usage = value_or<TokenUsage>(j, "aux_usage", {});
    v.search_calls = value_or(j, "search_calls", 0);
    v.scrape_calls = value_or(j, "scrape_calls", 0);
    v.reasoning = value_or<std::string>(j, "reasoning", "");
}

void to_json(json& j, const Trajectory& v) {
    j = json{{"schema_version", kSchemaVersion},
             {"instance_id", v.instance_id},
             {"question", v.question},
             {"groundtruth", v.groundtruth},
             {"framework", to_string(v.framework)},
             {"budget", v.budget},
             {"turns", v.turns},
             {"context_snapshots", v.context_snapshots},
             {"usage_total", v.usage_total},
             {"termination", to_string(v.termination)},
             {"error", v.error},
             {"wall_time", v.wall_time}};
    put_optional(j, "final_answer", v.final_answer);
    put_optional(j, "final_output", v.final_output);
    j["outcome"] = v.outcome ? json(to_string(*v.outcome)) : json(nullptr);
}

void from_json(const json& j, Trajectory& v) {
    int version = value_or(j, "schema_version", 0);
    if (version != kSchemaVersion) {
        throw std::runtime_error("unsupported trajectory schema_version " + std::to_string(version));
    }
    v.instance_id = j.at("instance_id").get<std::string>();
    v.question = value_or<std::string>(j, "question", "");
    v.groundtruth = value_or<std::string>(j, "groundtruth", "");
    v.framework = framework_from_string(j.at("framework").get<std::string>());
    v.budget = value_or<Budget>(j, "budget", {});
    v.turns = value_or<std::vector<Turn>>(j, "turns", {});
    v.context_snapshots = value_or<std::vector<Context>>(j, "context_snapshots", {});
    get_optional(j, "final_answer", v.final_answer);
    get_optional(j, "final_output", v.final_output);
    v.usage_total = value_or<UsageMeter>(j, "usage_total", {});
    if (auto it = j.find("outcome"); it != j.end() && !it->is_null()) {
        v.outcome = outcome_from_string(it->get<std::string>());
    } else {
        v.outcome.reset();
    }
    v.termination = termination_from_string(value_or<std::string>(j, "termination", "answered"));
    v.error = value_or<std::string>(j, "error", "");
    v.wall_time = value_or(j, "wall_time", 0.0);
}

std::vector<TaskInstance> read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DatasetError(path.string(), 0, "cannot open dataset");
    }
    std::vector<TaskInstance> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        TaskInstance inst;
        try {
            inst = json::parse(line).get<TaskInstance>();
        } catch (const std::exception& e) {
            throw DatasetError(path.string(), lineno, std::string("malformed record: ") + e.what());
        }
        if (inst.id.empty()) {
            throw DatasetError(path.string(), lineno, "empty id");
        }
        if (inst.question.empty()) {
            throw DatasetError(path.string(), lineno, "empty question");
        }
        if (inst.groundtruth.empty()) {
            throw DatasetError(path.string(), lineno, "empty answer");
        }
        if (!ids.insert(inst.id).second) {
            throw DatasetError(path.string(), lineno, "duplicate id '" + inst.id + "'");
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::string trajectory_to_line(const Trajectory& t) { return json(t).dump(); }

Trajectory trajectory_from_line(const std::string& line) { return json::parse(line).get<Trajectory>(); }

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        out.push_back(json::parse(line));
    }
    return out;
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
    std::vector<Trajectory> out;
    for (const auto& j : read_jsonl(path)) {
        out.push_back(j.get<Trajectory>());
    }
    return out;
}

} // namespace slim
