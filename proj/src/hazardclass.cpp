#include "mei/hazardclass.hpp"

#include "mei/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace mei {

HazardLayer classify_percentile(const HazardLayer& layer, double threshold)
{
    if (layer.type == HazardType::heat) throw ConfigError("percentile threshold does not apply to heat");
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("percentile threshold must lie in [0, 1]");
    }
    HazardLayer out = layer;
    out.mask.clear();
    for (const auto& [geoid, v] : layer.values) out.mask.emplace(geoid, v > threshold);
    return out;
}

double interpolated_percentile(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
    const double n = static_cast<double>(sorted.size());
    const double rank = std::clamp(p * (n + 1.0), 1.0, n);  // 1-based
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    if (lo >= sorted.size()) return sorted.back();
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

HeatClassification classify_heat_quartile(const HazardLayer& layer, std::span<const CensusTract> tracts)
{
    if (layer.type != HazardType::heat) throw ConfigError("quartile classification applies to heat only");

    std::unordered_map<std::string_view, std::string_view> county_of;
    for (const auto& t : tracts) county_of.emplace(t.geoid, t.county_fips);

    HeatClassification result;
    result.layer = layer;
    result.layer.mask.clear();

    std::map<std::string_view, std::vector<std::pair<std::string_view, double>>> counties;
    for (const auto& [geoid, v] : layer.values) {
        auto it = county_of.find(geoid);
        if (it == county_of.end()) {
            result.warnings.push_back("heat value for unknown tract " + geoid + " ignored");
            continue;
        }
        counties[it->second].emplace_back(geoid, v);
    }

    for (const auto& [county, members] : counties) {
        std::vector<double> sorted;
        sorted.reserve(members.size());
        for (const auto& [_, v] : members) sorted.push_back(v);
        std::sort(sorted.begin(), sorted.end());
        const double cut = sorted.size() < 4 ? sorted.back() : interpolated_percentile(sorted, 0.75);
        for (const auto& [geoid, v] : members) result.layer.mask.emplace(std::string(geoid), v >= cut);
    }
    return result;
}

HazardLayer classify_heat_absolute(const HazardLayer& layer, double min_days)
{
    if (layer.type != HazardType::heat) throw ConfigError("absolute day threshold applies to heat only");
    if (!(min_days >= 0.0)) throw ConfigError("heat day threshold must be non-negative");
    HazardLayer out = layer;
    out.mask.clear();
    for (const auto& [geoid, v] : layer.values) out.mask.emplace(geoid, v >= min_days);
    return out;
}

}  // namespace mei
