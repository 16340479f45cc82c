#include "slim/llm/scripted.hpp"

#include "slim/core/json_io.hpp"

#include <fstream>

namespace slim::llm {

ScriptEntry ScriptEntry::tool(std::string name, json args, std::optional<TokenUsage> usage) {
    ScriptEntry e;
    e.action = LlmAction{ToolCall{std::move(name), std::move(args), std::nullopt}, {}};
    e.usage = usage;
    return e;
}

ScriptEntry ScriptEntry::final(std::string text, std::optional<TokenUsage> usage) {
    ScriptEntry e;
    e.action = LlmAction{FinalText{std::move(text)}, {}};
    e.usage = usage;
    return e;
}

ScriptEntry ScriptEntry::failure(FailureKind kind) {
    ScriptEntry e;
    e.error = kind;
    return e;
}

void to_json(json& j, const ScriptEntry& e) {
    j = json::object();
    if (!e.instance_id.empty()) {
        j["instance_id"] = e.instance_id;
    }
    if (e.error) {
        j["type"] = "error";
        j["error"] = to_string(*e.error);
    } else if (e.action && e.action->is_tool_call()) {
        j["type"] = "tool_call";
        j["name"] = e.action->tool_call().name;
        j["arguments"] = e.action->tool_call().arguments;
    } else if (e.action) {
        j["type"] = "final";
        j["text"] = e.action->final_text().text;
    }
    if (e.action && !e.action->reasoning.empty()) {
        j["reasoning"] = e.action->reasoning;
    }
    if (e.usage) {
        j["usage"] = *e.usage;
    }
}

void from_json(const json& j, ScriptEntry& e) {
    e = ScriptEntry{};
    e.instance_id = j.value("instance_id", "");
    std::string type = j.at("type").get<std::string>();
    if (type == "error") {
        std::string kind = j.at("error").get<std::string>();
        if (kind == "context_overflow") {
            e.error = FailureKind::ContextOverflow;
        } else if (kind == "content_filter") {
            e.error = FailureKind::ContentFilter;
        } else if (kind == "provider_unavailable") {
            e.error = FailureKind::ProviderUnavailable;
        } else {
            throw std::invalid_argument("unknown scripted error '" + kind + "'");
        }
    } else if (type == "tool_call") {
        e.action = LlmAction{ToolCall{j.at("name").get<std::string>(), j.value("arguments", json::object()),
                                      std::nullopt},
                             j.value("reasoning", "")};
    } else if (type == "final") {
        e.action = LlmAction{FinalText{j.at("text").get<std::string>()}, j.value("reasoning", "")};
    } else {
        throw std::invalid_argument("unknown script entry type '" + type + "'");
    }
    if (auto it = j.find("usage"); it != j.end() && !it->is_null()) {
        e.usage = it->get<TokenUsage>();
    }
}

ScriptedLlm::ScriptedLlm(std::vector<ScriptEntry> entries, std::optional<std::int64_t> max_context_tokens)
    : queue_(entries.begin(), entries.end()), max_context_tokens_(max_context_tokens) {}

std::size_t ScriptedLlm::remaining() const {
    std::lock_guard lock(mu_);
    return queue_.size();
}

std::size_t ScriptedLlm::calls() const {
    std::lock_guard lock(mu_);
    return requests_.size();
}

std::vector<Context> ScriptedLlm::requests() const {
    std::lock_guard lock(mu_);
    return requests_;
}

Completion ScriptedLlm::do_complete(const Context& context, std::span<const ToolSchema>, const DecodeParams&) {
    std::lock_guard lock(mu_);
    requests_.push_back(context);
    std::int64_t prompt_tokens = estimate_context_tokens(context);
    if (max_context_tokens_ && prompt_tokens > *max_context_tokens_) {
        throw LlmError(FailureKind::ContextOverflow,
                       "scripted provider: context of " + std::to_string(prompt_tokens) +
                           " tokens exceeds limit " + std::to_string(*max_context_tokens_));
    }
    if (queue_.empty()) {
        throw ScriptExhausted("scripted provider: script exhausted after " +
                              std::to_string(requests_.size() - 1) + " responses");
    }
    ScriptEntry entry = std::move(queue_.front());
    queue_.pop_front();
    if (entry.error) {
        throw LlmError(*entry.error, "scripted provider error: " + std::string(to_string(*entry.error)));
    }
    Completion c{*entry.action, {}};
    if (entry.usage) {
        c.usage = *entry.usage;
    } else {
        std::string out = c.action.is_tool_call()
                              ? render_tool_call(c.action.tool_call().name, c.action.tool_call().arguments)
                              : c.action.final_text().text;
        c.usage = TokenUsage{prompt_tokens, 0, estimate_tokens(out)};
    }
    return c;
}

ScriptBook ScriptBook::load(const std::filesystem::path& path) {
    std::vector<ScriptEntry> entries;
    for (const auto& j : read_jsonl(path)) {
        entries.push_back(j.get<ScriptEntry>());
    }
    return from_entries(entries);
}

ScriptBook ScriptBook::from_entries(const std::vector<ScriptEntry>& entries) {
    ScriptBook book;
    for (const auto& e : entries) {
        book.queues_[e.instance_id].push_back(e);
    }
    return book;
}

std::shared_ptr<ScriptedLlm> ScriptBook::client_for(const std::string& instance_id,
                                                    std::optional<std::int64_t> max_context_tokens) const {
    auto it = queues_.find(instance_id);
    if (it == queues_.end()) {
        it = queues_.find("");
    }
    std::vector<ScriptEntry> entries = it == queues_.end() ? std::vector<ScriptEntry>{} : it->second;
    return std::make_shared<ScriptedLlm>(std::move(entries), max_context_tokens);
}

void write_script(const std::filesystem::path& path, const std::vector<ScriptEntry>& entries) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto& e : entries) {
        out << json(e).dump() << '\n';
    }
}

} // namespace slim::llm
