#include "slim/llm/client.hpp"

#include <algorithm>
#include <thread>

namespace slim::llm {

std::string_view to_string(FailureKind k) {
    switch (k) {
    case FailureKind::ContextOverflow: return "context_overflow";
    case FailureKind::ContentFilter: return "content_filter";
    case FailureKind::ProviderUnavailable: return "provider_unavailable";
    }
    return "provider_unavailable";
}

FailureClass classify_failure(const LlmError& error) {
    switch (error.kind()) {
    case FailureKind::ContextOverflow: return FailureClass::ContextOverflow;
    case FailureKind::ContentFilter: return FailureClass::ContentFilter;
    case FailureKind::ProviderUnavailable: return FailureClass::Other;
    }
    return FailureClass::Other;
}

FailureClass classify_failure(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const LlmError& e) {
        return classify_failure(e);
    } catch (...) {
        return FailureClass::Other;
    }
}

std::int64_t estimate_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t estimate_context_tokens(const Context& context) {
    std::int64_t total = 0;
    for (const auto& m : context) {
        total += kMessageOverheadTokens + estimate_tokens(m.content);
    }
    return total;
}

std::string render_tool_call(const std::string& name, const json& arguments) {
    return json{{"tool", name}, {"arguments", arguments}}.dump();
}

std::optional<std::pair<std::string, json>> parse_rendered_tool_call(const std::string& content) {
    if (content.empty() || content.front() != '{') {
        return std::nullopt;
    }
    auto j = json::parse(content, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("tool") || !j["tool"].is_string() ||
        !j.contains("arguments")) {
        return std::nullopt;
    }
    return std::make_pair(j["tool"].get<std::string>(), j["arguments"]);
}

Completion LlmClient::complete(const Context& context, std::span<const ToolSchema> tools,
                               const DecodeParams& params) {
    if (context.empty() || context.front().role != Role::System) {
        throw std::invalid_argument("completion context must start with a system prompt");
    }
    Completion c = do_complete(context, tools, params);

    if (c.action.is_tool_call()) {
        const auto& call = c.action.tool_call();
        if (tools.empty()) {
            // Nothing was declared, so the call is just text.
            c.action.value = FinalText{render_tool_call(call.name, call.arguments)};
        } else {
            bool declared = std::any_of(tools.begin(), tools.end(),
                                        [&](const ToolSchema& t) { return t.name == call.name; });
            if (!declared) {
                auto& mut = std::get<ToolCall>(c.action.value);
                mut.parse_error = "unknown tool '" + call.name + "'";
            }
        }
    }
    c.usage.input_tokens = std::max<std::int64_t>(0, c.usage.input_tokens);
    c.usage.output_tokens = std::max<std::int64_t>(0, c.usage.output_tokens);
    c.usage.cached_input_tokens = std::clamp<std::int64_t>(c.usage.cached_input_tokens, 0, c.usage.input_tokens);
    return c;
}

RateLimiter::RateLimiter(double requests_per_minute)
    : interval_(requests_per_minute > 0
                    ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(60.0 / requests_per_minute))
                    : std::chrono::steady_clock::duration::zero()),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero()) {
        return;
    }
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mu_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

} // namespace slim::llm
