#pragma once

#include <cstdint>

namespace slim {

// Token counts reported for one LLM call. Providers that do not report
// cached tokens leave cached_input_tokens at 0.
struct TokenUsage {
    std::int64_t input_tokens = 0;
    std::int64_t cached_input_tokens = 0;
    std::int64_t output_tokens = 0;

    bool valid() const {
        return input_tokens >= 0 && output_tokens >= 0 && cached_input_tokens >= 0 &&
               cached_input_tokens <= input_tokens;
    }

    TokenUsage& operator+=(const TokenUsage& o) {
        input_tokens += o.input_tokens;
        cached_input_tokens += o.cached_input_tokens;
        output_tokens += o.output_tokens;
        return *this;
    }
    friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

// Everything billable about a run: LLM tokens plus the two atomic tool
// operations (search API calls and page scrapes).
struct UsageMeter {
    std::int64_t input_tokens = 0;
    std::int64_t cached_input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t search_calls = 0;
    std::int64_t scrape_calls = 0;

    bool valid() const {
        return input_tokens >= 0 && cached_input_tokens >= 0 && output_tokens >= 0 &&
               search_calls >= 0 && scrape_calls >= 0 && cached_input_tokens <= input_tokens;
    }

    UsageMeter& add_tokens(const TokenUsage& u) {
        input_tokens += u.input_tokens;
        cached_input_tokens += u.cached_input_tokens;
        output_tokens += u.output_tokens;
        return *this;
    }

    UsageMeter& operator+=(const UsageMeter& o) {
        input_tokens += o.input_tokens;
        cached_input_tokens += o.cached_input_tokens;
        output_tokens += o.output_tokens;
        search_calls += o.search_calls;
        scrape_calls += o.scrape_calls;
        return *this;
    }
    friend UsageMeter operator+(UsageMeter a, const UsageMeter& b) { return a += b; }
    friend bool operator==(const UsageMeter&, const UsageMeter&) = default;
};

} // namespace slim
