#include "slim/core/prompts.hpp"

#include "slim/core/hash.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slim::prompts {

PromptSet::PromptSet() {
    for (const auto& [name, text] : detail::embedded()) {
        texts_.emplace(std::string(name), std::string(text));
    }
}

PromptSet PromptSet::with_overrides(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("prompt directory not found: " + dir.string());
    }
    PromptSet set;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string name = fs::relative(entry.path(), dir).replace_extension().generic_string();
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        set.texts_[name] = ss.str();
    }
    return set;
}

const std::string& PromptSet::get(const std::string& name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) {
        throw std::out_of_range("unknown prompt: " + name);
    }
    return it->second;
}

std::map<std::string, std::string> PromptSet::hashes() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, text] : texts_) {
        out[name] = sha256_hex(text);
    }
    return out;
}

std::vector<std::string> PromptSet::names() const {
    std::vector<std::string> out;
    for (const auto& [name, text] : texts_) out.push_back(name);
    return out;
}

std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& vars) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        bool matched = false;
        if (tmpl[i] == '<') {
            for (const auto& [key, value] : vars) {
                std::string token = "<" + key + ">";
                if (tmpl.compare(i, token.size(), token) == 0) {
                    out += value;
                    i += token.size();
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) {
            out += tmpl[i++];
        }
    }
    return out;
}

} // namespace slim::prompts
