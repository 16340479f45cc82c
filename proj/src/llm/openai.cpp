#include "slim/llm/openai.hpp"

#include "slim/core/http.hpp"
#include "slim/core/strings.hpp"

#include <thread>

namespace slim::llm {

namespace {

bool mentions_any(const std::string& haystack, std::initializer_list<const char*> needles) {
    std::string lower = to_lower_ascii(haystack);
    for (const char* n : needles) {
        if (lower.find(n) != std::string::npos) {
            return true;
        }
    }
    return false;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

json build_chat_request(const std::string& model, const Context& context, std::span<const ToolSchema> tools,
                        const DecodeParams& params) {
    json messages = json::array();
    for (std::size_t i = 0; i < context.size(); ++i) {
        const ChatMessage& m = context[i];
        bool next_is_tool = i + 1 < context.size() && context[i + 1].role == Role::Tool;
        if (m.role == Role::Assistant && next_is_tool) {
            if (auto call = parse_rendered_tool_call(m.content)) {
                std::string id = "call_" + std::to_string(i);
                messages.push_back({{"role", "assistant"},
                                    {"content", nullptr},
                                    {"tool_calls",
                                     json::array({{{"id", id},
                                                   {"type", "function"},
                                                   {"function",
                                                    {{"name", call->first}, {"arguments", call->second.dump()}}}}})}});
                messages.push_back({{"role", "tool"}, {"tool_call_id", id}, {"content", context[i + 1].content}});
                ++i;
                continue;
            }
        }
        if (m.role == Role::Tool) {
            messages.push_back(
                {{"role", "user"}, {"content", "[" + m.tool_name.value_or("tool") + " result]\n" + m.content}});
            continue;
        }
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }

    json req{{"model", model},
             {"messages", messages},
             {"temperature", params.temperature},
             {"max_completion_tokens", params.max_output_tokens}};
    if (!tools.empty()) {
        json decl = json::array();
        for (const auto& t : tools) {
            decl.push_back({{"type", "function"},
                            {"function",
                             {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
        }
        req["tools"] = decl;
        req["tool_choice"] = "auto";
    }
    if (params.json_output) {
        req["response_format"] = {{"type", "json_object"}};
    }
    return req;
}

Completion parse_chat_response(const json& body) {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw LlmError(FailureKind::ProviderUnavailable, "malformed completion: no choices");
    }
    const json& choice = body["choices"][0];
    if (choice.value("finish_reason", "") == "content_filter") {
        throw LlmError(FailureKind::ContentFilter, "completion stopped by content filter");
    }
    const json& msg = choice.at("message");

    Completion c;
    for (const char* key : {"reasoning_content", "reasoning"}) {
        if (msg.contains(key) && msg[key].is_string()) {
            c.action.reasoning = msg[key].get<std::string>();
            break;
        }
    }
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
        const json& fn = msg["tool_calls"][0].at("function");
        ToolCall call;
        call.name = fn.value("name", "");
        std::string raw = fn.contains("arguments") && fn["arguments"].is_string()
                              ? fn["arguments"].get<std::string>()
                              : fn.value("arguments", json::object()).dump();
        json args = json::parse(raw, nullptr, false);
        if (args.is_discarded() || !args.is_object()) {
            call.parse_error = "tool arguments are not a JSON object: " + raw;
        } else {
            call.arguments = std::move(args);
        }
        c.action.value = std::move(call);
    } else {
        c.action.value = FinalText{msg.contains("content") && msg["content"].is_string()
                                       ? msg["content"].get<std::string>()
                                       : std::string()};
    }

    if (body.contains("usage") && body["usage"].is_object()) {
        const json& u = body["usage"];
        c.usage.input_tokens = u.value("prompt_tokens", 0);
        c.usage.output_tokens = u.value("completion_tokens", 0);
        if (u.contains("prompt_tokens_details") && u["prompt_tokens_details"].is_object()) {
            c.usage.cached_input_tokens = u["prompt_tokens_details"].value("cached_tokens", 0);
        }
    }
    return c;
}

LlmError classify_http_error(int status, const std::string& body) {
    std::string code;
    std::string message = body;
    json j = json::parse(body, nullptr, false);
    if (!j.is_discarded() && j.contains("error") && j["error"].is_object()) {
        const json& e = j["error"];
        if (e.contains("code") && e["code"].is_string()) code = e["code"].get<std::string>();
        if (e.contains("message") && e["message"].is_string()) message = e["message"].get<std::string>();
    }
    std::string what = "http " + std::to_string(status) + ": " + message;
    if (code == "context_length_exceeded" ||
        mentions_any(message, {"context length", "context window", "maximum context", "too many tokens",
                               "prompt is too long"})) {
        return LlmError(FailureKind::ContextOverflow, what);
    }
    if (code == "content_filter" || code == "content_policy_violation" ||
        mentions_any(message, {"content filter", "content management policy", "content policy"})) {
        return LlmError(FailureKind::ContentFilter, what);
    }
    return LlmError(FailureKind::ProviderUnavailable, what);
}

OpenAiClient::OpenAiClient(OpenAiConfig config) : config_(std::move(config)) {
    while (!config_.base_url.empty() && config_.base_url.back() == '/') {
        config_.base_url.pop_back();
    }
}

Completion OpenAiClient::do_complete(const Context& context, std::span<const ToolSchema> tools,
                                     const DecodeParams& params) {
    HttpRequest req;
    req.method = "POST";
    req.url = config_.base_url + "/chat/completions";
    req.headers["Authorization"] = "Bearer " + config_.api_key;
    req.body = build_chat_request(config_.model, context, tools, params).dump();
    req.timeout = config_.timeout;

    auto backoff = config_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (config_.limiter) {
            config_.limiter->acquire();
        }
        try {
            HttpResponse res = http_send(req);
            if (res.status >= 200 && res.status < 300) {
                json body = json::parse(res.body, nullptr, false);
                if (body.is_discarded()) {
                    throw LlmError(FailureKind::ProviderUnavailable, "completion body is not JSON");
                }
                return parse_chat_response(body);
            }
            LlmError err = classify_http_error(res.status, res.body);
            if (err.kind() != FailureKind::ProviderUnavailable || !retryable_status(res.status)) {
                throw err;
            }
            last_error = err.what();
        } catch (const TransportError& e) {
            last_error = e.what();
        }
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw LlmError(FailureKind::ProviderUnavailable,
                   "provider unavailable after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

} // namespace slim::llm
