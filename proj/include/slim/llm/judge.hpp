#pragma once

#include "slim/llm/client.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace slim::llm {

enum class Verdict { No, Yes, Indeterminate, Skipped };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

// "yes"/"no" from a judge response: the "conclusion" key of a JSON object
// (any letter case), else a "Conclusion: yes" line. nullopt otherwise.
std::optional<bool> parse_conclusion(std::string_view response);

// The first JSON array in a response, either bare or as the value of an
// object key. nullopt when none parses.
std::optional<json> parse_json_list(std::string_view response);

struct JudgeRecord {
    std::string instance_id;
    std::string detector;
    std::string prompt_sha256;
    std::string prompt;
    std::string response;
    TokenUsage usage;
    std::optional<std::string> error;
};

void to_json(json& j, const JudgeRecord& r);
void from_json(const json& j, JudgeRecord& r);

// One JSONL file per instance under a directory.
class JudgeLog {
public:
    explicit JudgeLog(std::filesystem::path dir);
    void append(const JudgeRecord& record);
    std::filesystem::path path_for(const std::string& instance_id) const;

private:
    std::filesystem::path dir_;
    std::mutex mu_;
};

// Thin wrapper around an LLM used as a classifier: judge decoding, logging
// of every exchange, and usage metering.
class Judge {
public:
    explicit Judge(LlmClient& client, JudgeLog* log = nullptr) : client_(client), log_(log) {}

    // One call. The filled prompt goes in as the system message, the
    // instruction as the user message. Throws LlmError.
    std::string ask(const std::string& instance_id, const std::string& detector, const std::string& prompt,
                    const std::string& instruction);

    // Yes/no question; an unparseable answer is asked once more, then
    // reported Indeterminate, as is any provider failure.
    Verdict yes_no(const std::string& instance_id, const std::string& detector, const std::string& prompt);

    // Asks for a JSON list; `validate` rejects malformed lists. Same retry
    // rule as yes_no. nullopt means indeterminate.
    template <typename Validate>
    std::optional<json> json_list(const std::string& instance_id, const std::string& detector,
                                  const std::string& prompt, const std::string& instruction, Validate validate) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::string response;
            try {
                response = ask(instance_id, detector, prompt, instruction);
            } catch (const LlmError&) {
                return std::nullopt;
            }
            auto list = parse_json_list(response);
            if (list && validate(*list)) return list;
        }
        return std::nullopt;
    }

    TokenUsage usage() const { return usage_; }
    int calls() const { return calls_; }

private:
    LlmClient& client_;
    JudgeLog* log_;
    TokenUsage usage_;
    int calls_ = 0;
};

inline constexpr const char* kYesNoInstruction =
    "Respond with a JSON object with the keys \"reasoning\" and \"conclusion\", where conclusion is \"yes\" or "
    "\"no\".";

} // namespace slim::llm
