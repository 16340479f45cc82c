#pragma once

#include "slim/llm/client.hpp"

#include <deque>
#include <filesystem>
#include <map>
#include <memory>

namespace slim::llm {

// One queued response. Either an action or a provider error.
struct ScriptEntry {
    std::string instance_id; // empty: default queue
    std::optional<LlmAction> action;
    std::optional<FailureKind> error;
    // When absent the usage is derived from estimate_tokens over the request
    // and the response text.
    std::optional<TokenUsage> usage;

    static ScriptEntry tool(std::string name, json args, std::optional<TokenUsage> usage = std::nullopt);
    static ScriptEntry final(std::string text, std::optional<TokenUsage> usage = std::nullopt);
    static ScriptEntry failure(FailureKind kind);
};

void to_json(json& j, const ScriptEntry& e);
void from_json(const json& j, ScriptEntry& e);

class ScriptExhausted : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Replays a fixed queue of responses in order. Running past the end throws
// ScriptExhausted, which the agents do not catch.
class ScriptedLlm : public LlmClient {
public:
    explicit ScriptedLlm(std::vector<ScriptEntry> entries,
                         std::optional<std::int64_t> max_context_tokens = std::nullopt);

    std::string name() const override { return "scripted"; }

    std::size_t remaining() const;
    std::size_t calls() const;
    // Every context this client was asked to complete, in order.
    std::vector<Context> requests() const;

private:
    Completion do_complete(const Context& context, std::span<const ToolSchema> tools,
                           const DecodeParams& params) override;

    mutable std::mutex mu_;
    std::deque<ScriptEntry> queue_;
    std::optional<std::int64_t> max_context_tokens_;
    std::vector<Context> requests_;
};

// A JSONL script file grouped into per-instance queues.
class ScriptBook {
public:
    static ScriptBook load(const std::filesystem::path& path);
    static ScriptBook from_entries(const std::vector<ScriptEntry>& entries);

    // Queue for an instance, falling back to the default (untagged) queue.
    std::shared_ptr<ScriptedLlm> client_for(const std::string& instance_id,
                                            std::optional<std::int64_t> max_context_tokens = std::nullopt) const;

    bool has(const std::string& instance_id) const { return queues_.count(instance_id) > 0; }

private:
    std::map<std::string, std::vector<ScriptEntry>> queues_;
};

void write_script(const std::filesystem::path& path, const std::vector<ScriptEntry>& entries);

} // namespace slim::llm
