#include "mei/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mei {

std::string_view to_string(HazardType h)
{
    switch (h) {
        case HazardType::air_pollution: return "air_pollution";
        case HazardType::toxic: return "toxic";
        case HazardType::heat: return "heat";
    }
    return "unknown";
}

std::string_view short_name(HazardType h)
{
    switch (h) {
        case HazardType::air_pollution: return "air";
        case HazardType::toxic: return "toxic";
        case HazardType::heat: return "heat";
    }
    return "unknown";
}

std::optional<HazardType> parse_hazard_type(std::string_view s)
{
    for (HazardType h : kHazards) {
        if (s == to_string(h) || s == short_name(h)) return h;
    }
    return std::nullopt;
}

std::string_view to_string(RegionClass c)
{
    switch (c) {
        case RegionClass::none: return "none";
        case RegionClass::direct: return "direct";
        case RegionClass::latent: return "latent";
    }
    return "unknown";
}

std::optional<RegionClass> parse_region_class(std::string_view s)
{
    if (s == "none") return RegionClass::none;
    if (s == "direct") return RegionClass::direct;
    if (s == "latent") return RegionClass::latent;
    return std::nullopt;
}

bool HazardLayer::is_high(const std::string& geoid) const
{
    auto it = mask.find(geoid);
    return it != mask.end() && it->second;
}

void ExposureAccumulator::merge(const ExposureAccumulator& other)
{
    if (other.geoid != geoid) {
        throw std::invalid_argument("cannot merge accumulators of different tracts: " + geoid +
                                    " vs " + other.geoid);
    }
    tdt_s += other.tdt_s;
    tdt_nonhome_s += other.tdt_nonhome_s;
    unresolved_dwell_s += other.unresolved_dwell_s;
    for (std::size_t h = 0; h < kHazardCount; ++h) {
        hdt_s[h] += other.hdt_s[h];
        hdt_nonhome_s[h] += other.hdt_nonhome_s[h];
    }
}

const MeiRow* MeiTable::find(std::string_view geoid) const
{
    auto it = std::lower_bound(rows.begin(), rows.end(), geoid,
                               [](const MeiRow& r, std::string_view g) { return r.geoid < g; });
    if (it == rows.end() || it->geoid != geoid) return nullptr;
    return &*it;
}

MeiRow* MeiTable::find(std::string_view geoid)
{
    return const_cast<MeiRow*>(std::as_const(*this).find(geoid));
}

namespace {

bool is_fraction(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void check_ring(const Ring& ring, const std::string& where, std::vector<Violation>& out)
{
    if (ring.size() < 4) {
        out.push_back({where, "ring needs at least 4 vertices (3 distinct + closing)"});
        return;
    }
    if (ring.front() != ring.back()) out.push_back({where, "ring is not closed"});
    for (const auto& p : ring) {
        if (!(p.lon >= -180.0 && p.lon <= 180.0) || !(p.lat >= -90.0 && p.lat <= 90.0)) {
            out.push_back({where, "vertex outside WGS84 bounds"});
            break;
        }
    }
}

}  // namespace

std::vector<Violation> validate(const StopRecord& r)
{
    std::vector<Violation> out;
    if (r.user_id.empty()) out.push_back({"user_id", "must be non-empty"});
    if (!(r.lon >= -180.0 && r.lon <= 180.0)) out.push_back({"lon", "out of range [-180, 180]"});
    if (!(r.lat >= -90.0 && r.lat <= 90.0)) out.push_back({"lat", "out of range [-90, 90]"});
    if (r.dwell_s < 0) out.push_back({"dwell_s", "must be non-negative"});
    return out;
}

std::vector<Violation> validate(const CensusTract& t)
{
    std::vector<Violation> out;
    if (t.geoid.size() != 11) out.push_back({"geoid", "must be 11 characters"});
    if (t.county_fips != t.geoid.substr(0, 5)) {
        out.push_back({"county_fips", "must equal the first 5 characters of geoid"});
    }
    if (t.geometry.parts.empty()) out.push_back({"geometry", "needs at least one polygon"});
    for (std::size_t p = 0; p < t.geometry.parts.size(); ++p) {
        const auto& poly = t.geometry.parts[p];
        if (poly.rings.empty()) out.push_back({"geometry", "polygon without rings"});
        for (std::size_t r = 0; r < poly.rings.size(); ++r) {
            check_ring(poly.rings[r],
                       "geometry[" + std::to_string(p) + "].ring[" + std::to_string(r) + "]", out);
        }
    }
    if (t.population < 0) out.push_back({"population", "must be non-negative"});
    if (!is_fraction(t.pct_minority)) out.push_back({"pct_minority", "fraction outside [0, 1]"});
    if (!is_fraction(t.pct_below_poverty200)) {
        out.push_back({"pct_below_poverty200", "fraction outside [0, 1]"});
    }
    return out;
}

std::vector<Violation> validate(const HazardLayer& layer)
{
    std::vector<Violation> out;
    for (const auto& [geoid, _] : layer.mask) {
        if (!layer.values.contains(geoid)) {
            out.push_back({"mask[" + geoid + "]", "geoid has a mask flag but no value"});
        }
    }
    for (const auto& [geoid, v] : layer.values) {
        if (layer.type == HazardType::heat) {
            if (!(std::isfinite(v) && v >= 0.0)) {
                out.push_back({"values[" + geoid + "]", "heat-day count must be non-negative"});
            }
        } else if (!is_fraction(v)) {
            out.push_back({"values[" + geoid + "]", "percentile outside [0, 1]"});
        }
    }
    return out;
}

std::vector<Violation> validate(const ExposureAccumulator& acc)
{
    std::vector<Violation> out;
    if (acc.tdt_s < 0) out.push_back({"tdt_s", "must be non-negative"});
    if (acc.tdt_nonhome_s < 0 || acc.tdt_nonhome_s > acc.tdt_s) {
        out.push_back({"tdt_nonhome_s", "must lie in [0, tdt_s]"});
    }
    if (acc.unresolved_dwell_s < 0 || acc.unresolved_dwell_s > acc.tdt_s) {
        out.push_back({"unresolved_dwell_s", "must lie in [0, tdt_s]"});
    }
    for (HazardType h : kHazards) {
        const auto i = index_of(h);
        const std::string name(short_name(h));
        if (acc.hdt_s[i] < 0 || acc.hdt_s[i] > acc.tdt_s) {
            out.push_back({"hdt_s[" + name + "]", "must lie in [0, tdt_s]"});
        }
        if (acc.hdt_nonhome_s[i] < 0 || acc.hdt_nonhome_s[i] > acc.tdt_nonhome_s) {
            out.push_back({"hdt_nonhome_s[" + name + "]", "must lie in [0, tdt_nonhome_s]"});
        }
        if (acc.hdt_nonhome_s[i] > acc.hdt_s[i]) {
            out.push_back({"hdt_nonhome_s[" + name + "]", "must not exceed hdt_s"});
        }
    }
    return out;
}

std::vector<Violation> validate(const MeiRow& row, const HazardMasks& masks)
{
    std::vector<Violation> out;
    for (HazardType h : kHazards) {
        const auto i = index_of(h);
        const std::string name(short_name(h));
        const auto& m = row.mei[i];
        if (m && !is_fraction(*m)) out.push_back({"mei[" + name + "]", "outside [0, 1]"});
        if (m.has_value() != row.mei[0].has_value()) {
            out.push_back({"mei[" + name + "]", "definedness must agree across hazards"});
        }
        if (row.nonhome_share[i] && m && *row.nonhome_share[i] > *m) {
            out.push_back({"nonhome_share[" + name + "]", "must not exceed mei"});
        }
        if (row.nonhome_conditional[i] && !is_fraction(*row.nonhome_conditional[i])) {
            out.push_back({"nonhome_conditional[" + name + "]", "outside [0, 1]"});
        }
        RegionClass expected = RegionClass::none;
        if (masks[i].is_high(row.geoid)) {
            expected = RegionClass::direct;
        } else if (m && *m > 0.0) {
            expected = RegionClass::latent;
        }
        if (row.region[i] != expected) {
            out.push_back({"region[" + name + "]", "expected " + std::string(to_string(expected))});
        }
    }
    if (row.cluster_label < -1) out.push_back({"cluster_label", "must be >= -1"});
    return out;
}

}  // namespace mei
