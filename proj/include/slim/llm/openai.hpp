#pragma once

#include "slim/llm/client.hpp"

#include <memory>

namespace slim::llm {

struct OpenAiConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model = "o3";
    std::chrono::seconds timeout{600};
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    std::shared_ptr<RateLimiter> limiter;
};

// Chat-completions client for OpenAI-compatible endpoints.
class OpenAiClient : public LlmClient {
public:
    explicit OpenAiClient(OpenAiConfig config);
    std::string name() const override { return "openai:" + config_.model; }

private:
    Completion do_complete(const Context& context, std::span<const ToolSchema> tools,
                           const DecodeParams& params) override;

    OpenAiConfig config_;
};

json build_chat_request(const std::string& model, const Context& context,
                        std::span<const ToolSchema> tools, const DecodeParams& params);

// Parses a chat-completions response body. Throws LlmError(ContentFilter)
// when the provider stopped for a content filter.
Completion parse_chat_response(const json& body);

// Maps a non-2xx response onto an error kind. Retryable statuses (429, 5xx)
// map to ProviderUnavailable.
LlmError classify_http_error(int status, const std::string& body);

} // namespace slim::llm
