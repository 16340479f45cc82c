#include "slim/llm/judge.hpp"

#include "slim/core/hash.hpp"
#include "slim/core/strings.hpp"

#include <fstream>
#include <regex>

namespace slim::llm {
namespace {

std::optional<json> try_parse(std::string_view text) {
    json j = json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

// Whole response, else the span between the first opening and last
// closing bracket of the given kind.
std::optional<json> parse_embedded(std::string_view response, char open, char close) {
    if (auto j = try_parse(response)) return j;
    auto b = response.find(open);
    auto e = response.rfind(close);
    if (b == std::string_view::npos || e == std::string_view::npos || e < b) return std::nullopt;
    return try_parse(response.substr(b, e - b + 1));
}

std::optional<bool> yes_no_word(std::string s) {
    s = to_lower_ascii(trim(s));
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '*')) s.erase(s.begin());
    if (s.rfind("yes", 0) == 0) return true;
    if (s.rfind("no", 0) == 0) return false;
    return std::nullopt;
}

} // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::No: return "no";
    case Verdict::Yes: return "yes";
    case Verdict::Indeterminate: return "indeterminate";
    case Verdict::Skipped: return "skipped";
    }
    return "indeterminate";
}

Verdict verdict_from_string(std::string_view s) {
    if (s == "no") return Verdict::No;
    if (s == "yes") return Verdict::Yes;
    if (s == "indeterminate") return Verdict::Indeterminate;
    if (s == "skipped") return Verdict::Skipped;
    throw std::invalid_argument("unknown verdict: " + std::string(s));
}

std::optional<bool> parse_conclusion(std::string_view response) {
    if (auto j = parse_embedded(response, '{', '}'); j && j->is_object()) {
        for (const auto& [key, value] : j->items()) {
            if (to_lower_ascii(key) == "conclusion") {
                if (value.is_string()) {
                    if (auto v = yes_no_word(value.get<std::string>())) return v;
                } else if (value.is_boolean()) {
                    return value.get<bool>();
                }
            }
        }
    }
    static const std::regex line(R"(conclusion\W*(yes|no)\b)", std::regex::icase);
    std::string text(response);
    std::smatch m;
    if (std::regex_search(text, m, line)) {
        return to_lower_ascii(m[1].str()) == "yes";
    }
    return std::nullopt;
}

std::optional<json> parse_json_list(std::string_view response) {
    if (auto j = try_parse(response)) {
        if (j->is_array()) return j;
        if (j->is_object()) {
            for (const auto& [key, value] : j->items()) {
                if (value.is_array()) return value;
            }
        }
    }
    if (auto j = parse_embedded(response, '[', ']'); j && j->is_array()) return j;
    return std::nullopt;
}

void to_json(json& j, const JudgeRecord& r) {
    j = json{{"instance_id", r.instance_id},
             {"detector", r.detector},
             {"prompt_sha256", r.prompt_sha256},
             {"prompt", r.prompt},
             {"response", r.response},
             {"usage", {{"input_tokens", r.usage.input_tokens},
                        {"cached_input_tokens", r.usage.cached_input_tokens},
                        {"output_tokens", r.usage.output_tokens}}}};
    if (r.error) j["error"] = *r.error;
}

void from_json(const json& j, JudgeRecord& r) {
    r.instance_id = j.at("instance_id").get<std::string>();
    r.detector = j.at("detector").get<std::string>();
    r.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    const auto& u = j.at("usage");
    r.usage = {u.at("input_tokens").get<std::int64_t>(), u.at("cached_input_tokens").get<std::int64_t>(),
               u.at("output_tokens").get<std::int64_t>()};
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
}

JudgeLog::JudgeLog(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path JudgeLog::path_for(const std::string& instance_id) const {
    std::string safe;
    for (char c : instance_id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                  c == '_' || c == '.';
        safe += ok ? c : '_';
    }
    // Sanitizing can merge distinct ids, so a short hash keeps files apart.
    return dir_ / (safe + "-" + sha256_hex(instance_id).substr(0, 8) + ".jsonl");
}

void JudgeLog::append(const JudgeRecord& record) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_for(record.instance_id), std::ios::app);
    out << json(record).dump() << '\n';
}

std::string Judge::ask(const std::string& instance_id, const std::string& detector, const std::string& prompt,
                       const std::string& instruction) {
    Context ctx{ChatMessage::system(prompt), ChatMessage::user(instruction)};
    JudgeRecord record{instance_id, detector, sha256_hex(prompt), prompt, "", {}, std::nullopt};
    ++calls_;
    try {
        Completion c = client_.complete(ctx, {}, DecodeParams::judge());
        usage_ += c.usage;
        record.usage = c.usage;
        record.response = c.action.is_tool_call() ? c.action.tool_call().arguments.dump() : c.action.final_text().text;
        if (log_) log_->append(record);
        return record.response;
    } catch (const LlmError& e) {
        record.error = e.what();
        if (log_) log_->append(record);
        throw;
    }
}

Verdict Judge::yes_no(const std::string& instance_id, const std::string& detector, const std::string& prompt) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response;
        try {
            response = ask(instance_id, detector, prompt, kYesNoInstruction);
        } catch (const LlmError&) {
            return Verdict::Indeterminate;
        }
        if (auto v = parse_conclusion(response)) return *v ? Verdict::Yes : Verdict::No;
    }
    return Verdict::Indeterminate;
}

} // namespace slim::llm
