#include "slim/accounting/cost.hpp"

#include "slim/core/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slim::accounting {
namespace {

Picos round_picos(double usd_per_unit_scaled, double units) {
    // usd_per_unit_scaled is quoted per `units` items.
    return static_cast<Picos>(std::llround(usd_per_unit_scaled * static_cast<double>(kPicosPerDollar) / units));
}

} // namespace

CostModel CostModel::from_quotes(double token_usd_per_million, double search_usd_per_thousand,
                                 double scrape_usd_per_thousand) {
    if (token_usd_per_million < 0 || search_usd_per_thousand < 0 || scrape_usd_per_thousand < 0) {
        throw std::invalid_argument("prices must be non-negative");
    }
    return CostModel{round_picos(token_usd_per_million, 1e6), round_picos(search_usd_per_thousand, 1e3),
                     round_picos(scrape_usd_per_thousand, 1e3)};
}

std::int64_t billable_tokens(const UsageMeter& u) {
    return (u.input_tokens - u.cached_input_tokens) + 4 * u.output_tokens;
}

std::int64_t billable_tokens(const TokenUsage& u) {
    return (u.input_tokens - u.cached_input_tokens) + 4 * u.output_tokens;
}

Picos total_cost(const UsageMeter& u, const CostModel& m) {
    return billable_tokens(u) * m.token_price + u.search_calls * m.search_price + u.scrape_calls * m.scrape_price;
}

std::int64_t to_micros(Picos p) {
    if (p >= 0) return (p + kPicosPerMicro / 2) / kPicosPerMicro;
    return -((-p + kPicosPerMicro / 2 - 1) / kPicosPerMicro);
}

double to_usd(Picos p) { return static_cast<double>(p) / static_cast<double>(kPicosPerDollar); }

std::int64_t tool_call_count(const Trajectory& t) {
    std::int64_t n = 0;
    for (const auto& turn : t.turns) {
        n += turn.search_calls + turn.scrape_calls;
    }
    return n;
}

PriceTable PriceTable::defaults() {
    PriceTable t;
    t.set("o3", CostModel::from_quotes(2.0, 0.5, 0.83));
    t.set("o4-mini", CostModel::from_quotes(1.1, 0.5, 0.83));
    t.set("claude-4-sonnet", CostModel::from_quotes(3.0, 0.5, 0.83));
    return t;
}

PriceTable PriceTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read prices file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str());
    if (!j.is_object()) {
        throw std::runtime_error("prices file must hold a JSON object");
    }
    PriceTable t = defaults();
    for (const auto& [model, p] : j.items()) {
        t.set(model, CostModel::from_quotes(p.at("token_usd_per_million").get<double>(),
                                            p.at("search_usd_per_thousand").get<double>(),
                                            p.at("scrape_usd_per_thousand").get<double>()));
    }
    return t;
}

const CostModel& PriceTable::at(const std::string& model) const {
    auto it = models_.find(model);
    if (it == models_.end()) {
        std::string known;
        for (const auto& [name, m] : models_) {
            known += (known.empty() ? "" : ", ") + name;
        }
        throw std::out_of_range("no prices for model '" + model + "' (known: " + known + ")");
    }
    return it->second;
}

void PriceTable::set(const std::string& model, CostModel m) { models_[model] = m; }

} // namespace slim::accounting
