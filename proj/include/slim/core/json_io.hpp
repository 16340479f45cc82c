#pragma once

#include "slim/core/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace slim {

using json = nlohmann::json;

class DatasetError : public std::runtime_error {
public:
    DatasetError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

void to_json(json& j, const TaskInstance& v);
void from_json(const json& j, TaskInstance& v);
void to_json(json& j, const SearchResult& v);
void from_json(const json& j, SearchResult& v);
void to_json(json& j, const Document& v);
void from_json(const json& j, Document& v);
void to_json(json& j, const Budget& v);
void from_json(const json& j, Budget& v);
void to_json(json& j, const TokenUsage& v);
void from_json(const json& j, TokenUsage& v);
void to_json(json& j, const UsageMeter& v);
void from_json(const json& j, UsageMeter& v);
void to_json(json& j, const ChatMessage& v);
void from_json(const json& j, ChatMessage& v);
void to_json(json& j, const Action& v);
void from_json(const json& j, Action& v);
void to_json(json& j, const Turn& v);
void from_json(const json& j, Turn& v);
void to_json(json& j, const Trajectory& v);
void from_json(const json& j, Trajectory& v);

// Dataset JSONL: one {"id", "question", "answer"} object per line. Blank
// lines are skipped. Throws DatasetError naming the 1-based line number.
std::vector<TaskInstance> read_dataset(const std::filesystem::path& path);

// One trajectory per line. Reading rejects unknown schema versions.
std::string trajectory_to_line(const Trajectory& t);
Trajectory trajectory_from_line(const std::string& line);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);

// Reads every non-blank line of a JSONL file as JSON.
std::vector<json> read_jsonl(const std::filesystem::path& path);

} // namespace slim
