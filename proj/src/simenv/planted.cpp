#include "slim/core/json_io.hpp"
#include "slim/simenv/corpus.hpp"

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <random>
#include <stdexcept>

namespace slim::simenv {
namespace {

// Filler vocabulary. None of these words occur in the breadcrumb sentences
// or the browse queries, so the breadcrumb paragraph is the only chunk that
// overlaps with them.
constexpr std::array<const char*, 48> kFiller = {
    "river",   "stone",   "market",  "garden", "yellow",  "quiet",   "window",  "harbor",
    "lantern", "copper",  "meadow",  "winter", "village", "bridge",  "orchard", "silver",
    "candle",  "forest",  "valley",  "marble", "engine",  "library", "morning", "weather",
    "pewter",  "voyage",  "timber",  "canvas", "island",  "pepper",  "thunder", "ribbon",
    "saddle",  "furnace", "pillar",  "basket", "mirror",  "ladder",  "kettle",  "anchor",
    "compass", "quarry",  "tavern",  "violet", "walnut",  "cobalt",  "tundra",  "glacier"};

constexpr std::array<const char*, 16> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                 "p", "r", "s", "t", "v", "z", "th", "qu"};
constexpr std::array<const char*, 6> kVowels = {"a", "e", "i", "o", "u", "ae"};

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    // Raw engine output keeps the sequence identical across standard libraries.
    std::uint64_t below(std::uint64_t n) { return rng_() % n; }

    std::string syllables(int count) {
        std::string s;
        for (int i = 0; i < count; ++i) {
            s += kOnsets[below(kOnsets.size())];
            s += kVowels[below(kVowels.size())];
        }
        return s;
    }

    std::string filler_paragraph(std::size_t min_chars) {
        std::string out;
        while (out.size() < min_chars) {
            std::string sentence;
            int words = 6 + static_cast<int>(below(7));
            for (int w = 0; w < words; ++w) {
                if (w) sentence += ' ';
                sentence += kFiller[below(kFiller.size())];
            }
            sentence[0] = static_cast<char>(sentence[0] - 'a' + 'A');
            if (!out.empty()) out += ' ';
            out += sentence + ".";
        }
        return out;
    }

private:
    std::mt19937_64 rng_;
};

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

} // namespace

std::pair<Corpus, PlantedTask> generate_planted_corpus(std::uint64_t seed, int depth, int noise_pages) {
    if (depth < 1) {
        throw std::invalid_argument("depth must be >= 1");
    }
    if (noise_pages < 0) {
        throw std::invalid_argument("noise_pages must be >= 0");
    }
    Gen gen(seed);
    PlantedTask planted;
    planted.required_hops = depth;

    for (int i = 1; i <= depth; ++i) {
        // Seed and hop number are embedded so terms never collide across
        // corpora or hops.
        planted.hop_terms.push_back(fmt::format("{}{}x{}", gen.syllables(3), seed, i));
        planted.hop_urls.push_back(fmt::format("https://planted.example/{}/hop-{}", seed, i));
    }
    std::string answer = fmt::format("{} {}{}", capitalize(gen.syllables(3)), capitalize(gen.syllables(2)),
                                     gen.syllables(1));
    planted.answer_page_url = planted.hop_urls.back();

    Corpus corpus;
    for (int i = 0; i < depth; ++i) {
        std::string clue = i + 1 < depth
                               ? fmt::format("The next lead in this trail is the keyword {}.", planted.hop_terms[i + 1])
                               : fmt::format("The final answer to the trail is {}.", answer);
        std::string content = gen.filler_paragraph(kSnippetCap + 40) + "\n" + gen.filler_paragraph(200) + "\n" +
                              clue + "\n" + gen.filler_paragraph(200);
        corpus.add(MockPage{planted.hop_urls[i], fmt::format("Record {}", planted.hop_terms[i]), std::move(content),
                            {{planted.hop_terms[i], kChainWeight}}});
    }
    for (int j = 0; j < noise_pages; ++j) {
        // Noise competes on the first one or two hop terms, always below the
        // chain weight.
        std::vector<std::pair<std::string, double>> terms;
        terms.emplace_back(planted.hop_terms[0], 1.0 + static_cast<double>(gen.below(8)));
        if (depth > 1 && gen.below(2) == 0) {
            terms.emplace_back(planted.hop_terms[1], 1.0 + static_cast<double>(gen.below(8)));
        }
        corpus.add(MockPage{fmt::format("https://noise.example/{}/n{}", seed, j),
                            fmt::format("Notes {}", gen.syllables(2)),
                            gen.filler_paragraph(kSnippetCap + 40) + "\n" + gen.filler_paragraph(300), terms});
    }

    planted.task.id = fmt::format("planted-{}-{}", seed, depth);
    planted.task.question =
        fmt::format("Follow the research trail that starts at the keyword {}. Each record names the keyword of the "
                    "next one. What name does the trail end with?",
                    planted.hop_terms[0]);
    planted.task.groundtruth = answer;
    planted.task.dataset_tag = "planted";
    return {std::move(corpus), std::move(planted)};
}

std::vector<llm::ScriptEntry> oracle_script(const PlantedTask& planted) {
    std::vector<llm::ScriptEntry> out;
    for (int i = 0; i < planted.required_hops; ++i) {
        bool last = i + 1 == planted.required_hops;
        out.push_back(llm::ScriptEntry::tool("search", {{"query", planted.hop_terms[i]}}));
        out.push_back(llm::ScriptEntry::tool(
            "browse", {{"url", planted.hop_urls[i]}, {"query", last ? kAnswerBrowseQuery : kHopBrowseQuery}}));
    }
    out.push_back(llm::ScriptEntry::final(
        fmt::format("Explanation: followed the trail to its last record.\nExact Answer: {}\nConfidence: 90%",
                    planted.task.groundtruth)));
    for (auto& e : out) {
        e.instance_id = planted.task.id;
    }
    return out;
}

PlantedBundle write_planted_bundle(std::uint64_t seed, int depth, int noise_pages, int count,
                                   const std::filesystem::path& out) {
    PlantedBundle bundle;
    Corpus corpus;
    std::vector<llm::ScriptEntry> script;
    std::filesystem::create_directories(out);
    std::ofstream dataset(out / "dataset.jsonl", std::ios::binary);
    std::ofstream planted_out(out / "planted.jsonl", std::ios::binary);
    for (int i = 0; i < count; ++i) {
        auto [c, planted] = generate_planted_corpus(seed + static_cast<std::uint64_t>(i), depth, noise_pages);
        corpus.merge(c);
        dataset << nlohmann::json(planted.task).dump() << '\n';
        planted_out << nlohmann::json(planted).dump() << '\n';
        auto oracle = oracle_script(planted);
        script.insert(script.end(), oracle.begin(), oracle.end());
        bundle.tasks.push_back(std::move(planted));
    }
    corpus.save(out / "corpus");
    llm::write_script(out / "oracle_script.jsonl", script);
    bundle.page_count = corpus.pages().size();
    return bundle;
}

} // namespace slim::simenv
