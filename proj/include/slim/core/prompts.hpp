#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slim::prompts {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded();
}

// Prompt texts by name, e.g. "agent/system_slim" or "judge/hallucination".
// Starts from the copies compiled into the library; a directory with the
// same layout (agent/*.txt, judge/*.txt) can override any subset.
class PromptSet {
public:
    PromptSet();
    static PromptSet with_overrides(const std::filesystem::path& dir);

    // Throws std::out_of_range for unknown names.
    const std::string& get(const std::string& name) const;
    bool contains(const std::string& name) const { return texts_.count(name) > 0; }
    void set(const std::string& name, std::string text) { texts_[name] = std::move(text); }

    // sha256 of every prompt, for run manifests.
    std::map<std::string, std::string> hashes() const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::string> texts_;
};

// Replaces each <placeholder> in one left-to-right pass. Substituted text is
// never rescanned, so values containing placeholder-like strings are safe.
std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& vars);

} // namespace slim::prompts
