#pragma once

#include "slim/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace slim::accounting {

// Money is kept as integer pico-dollars so per-token prices such as
// $1.10 per million tokens stay exact; micro-dollars are derived on output.
using Picos = std::int64_t;

inline constexpr Picos kPicosPerMicro = 1'000'000;
inline constexpr Picos kPicosPerDollar = 1'000'000'000'000;

struct CostModel {
    Picos token_price = 0;  // per billable token
    Picos search_price = 0; // per search API call
    Picos scrape_price = 0; // per page scrape

    // Prices as quoted by vendors. Values are rounded to the nearest pico.
    static CostModel from_quotes(double token_usd_per_million, double search_usd_per_thousand,
                                 double scrape_usd_per_thousand);

    bool valid() const { return token_price >= 0 && search_price >= 0 && scrape_price >= 0; }

    friend bool operator==(const CostModel&, const CostModel&) = default;
};

// Non-cached input plus four times output.
std::int64_t billable_tokens(const UsageMeter& u);
std::int64_t billable_tokens(const TokenUsage& u);

Picos total_cost(const UsageMeter& u, const CostModel& m);

// Round half up to whole micro-dollars.
std::int64_t to_micros(Picos p);
double to_usd(Picos p);

// Search API calls plus scrapes recorded on the trajectory.
std::int64_t tool_call_count(const Trajectory& t);

// Model name to prices. Ships with defaults for the models we evaluate.
class PriceTable {
public:
    static PriceTable defaults();
    // JSON object {model: {token_usd_per_million, search_usd_per_thousand,
    // scrape_usd_per_thousand}}; entries override the defaults.
    static PriceTable load(const std::filesystem::path& path);

    // Throws std::out_of_range listing the known models.
    const CostModel& at(const std::string& model) const;
    bool contains(const std::string& model) const { return models_.count(model) > 0; }
    void set(const std::string& model, CostModel m);

private:
    std::map<std::string, CostModel> models_;
};

} // namespace slim::accounting
