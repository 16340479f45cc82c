#pragma once

#include "slim/core/types.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace slim::llm {

using json = nlohmann::json;

struct ToolSchema {
    std::string name;
    std::string description;
    json parameters; // JSON schema of the arguments object
};

struct ToolCall {
    std::string name;
    json arguments = json::object();
    // Set when the provider returned arguments that are not a JSON object,
    // or named a tool that was not declared. The agent reports it back as
    // the tool response.
    std::optional<std::string> parse_error;
};

struct FinalText {
    std::string text;
};

struct LlmAction {
    std::variant<ToolCall, FinalText> value;
    std::string reasoning;

    bool is_tool_call() const { return std::holds_alternative<ToolCall>(value); }
    const ToolCall& tool_call() const { return std::get<ToolCall>(value); }
    const FinalText& final_text() const { return std::get<FinalText>(value); }
};

struct DecodeParams {
    double temperature = 1.0;
    int max_output_tokens = 32768;
    bool json_output = false;

    static DecodeParams agent() { return {}; }
    static DecodeParams judge() { return {0.0, 32768, true}; }
};

struct Completion {
    LlmAction action;
    TokenUsage usage;
};

enum class FailureKind { ContextOverflow, ContentFilter, ProviderUnavailable };

std::string_view to_string(FailureKind k);

class LlmError : public std::runtime_error {
public:
    LlmError(FailureKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    FailureKind kind() const { return kind_; }

private:
    FailureKind kind_;
};

enum class FailureClass { ContextOverflow, ContentFilter, Other };

FailureClass classify_failure(const LlmError& error);
FailureClass classify_failure(std::exception_ptr error);

// Deterministic token estimate: 4 bytes per token rounded up, plus a fixed
// per-message framing overhead.
inline constexpr std::int64_t kMessageOverheadTokens = 4;
std::int64_t estimate_tokens(std::string_view text);
std::int64_t estimate_context_tokens(const Context& context);

// Renders an agent tool call as the assistant message stored in context.
std::string render_tool_call(const std::string& name, const json& arguments);
// Inverse of render_tool_call; nullopt when the content is not a rendered call.
std::optional<std::pair<std::string, json>> parse_rendered_tool_call(const std::string& content);

class LlmClient {
public:
    virtual ~LlmClient() = default;

    // Exactly one action per call. Throws LlmError. Requires a non-empty
    // context whose first message is the system prompt.
    Completion complete(const Context& context, std::span<const ToolSchema> tools,
                        const DecodeParams& params = DecodeParams::agent());

    virtual std::string name() const = 0;

private:
    virtual Completion do_complete(const Context& context, std::span<const ToolSchema> tools,
                                   const DecodeParams& params) = 0;
};

// Spaces requests evenly so no more than requests_per_minute start within a
// minute. Shared between clients that hit the same provider.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute);
    void acquire();

private:
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_;
    std::mutex mu_;
};

} // namespace slim::llm
