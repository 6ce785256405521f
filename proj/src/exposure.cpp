#include "mei/exposure.hpp"

#include "mei/parallel.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mei {

namespace {

struct Shard {
    std::vector<ExposureAccumulator> tracts;
    AccumulationDiagnostics diag;
    std::unordered_set<std::string_view> dropped;
};

}  // namespace

Accumulation accumulate(std::span<const StopRecord> stops, const HomeMap& homes, const TractIndex& index,
                        const HazardMasks& masks, unsigned threads)
{
    const auto located = locate_all(index, stops, threads);
    return accumulate(stops, located, homes, index, masks, threads);
}

Accumulation accumulate(std::span<const StopRecord> stops, std::span<const std::optional<TractId>> located,
                        const HomeMap& homes, const TractIndex& index, const HazardMasks& masks,
                        unsigned threads)
{
    if (located.size() != stops.size()) throw std::invalid_argument("located/stops size mismatch");
    const std::size_t n_tracts = index.size();

    PerHazard<std::vector<char>> high;
    for (HazardType h : kHazards) {
        auto& bits = high[index_of(h)];
        bits.resize(n_tracts);
        for (TractId t = 0; t < n_tracts; ++t) bits[t] = masks[index_of(h)].is_high(index.geoid(t)) ? 1 : 0;
    }

    std::unordered_map<std::string_view, TractId> home_of;
    home_of.reserve(homes.assignments.size());
    for (const auto& [user, geoid] : homes.assignments) {
        if (auto id = index.find(geoid)) home_of.emplace(user, *id);
    }

    threads = std::max(1u, threads);
    std::vector<Shard> shards(threads);
    parallel_chunks(stops.size(), threads, [&](unsigned w, std::size_t begin, std::size_t end) {
        Shard& s = shards[w];
        s.tracts.resize(n_tracts);
        for (std::size_t i = begin; i < end; ++i) {
            const StopRecord& stop = stops[i];
            s.diag.stops_total += 1;
            s.diag.dwell_total_s += stop.dwell_s;
            auto home_it = home_of.find(stop.user_id);
            if (home_it == home_of.end()) {
                s.diag.stops_ignored += 1;
                s.diag.dwell_ignored_s += stop.dwell_s;
                s.dropped.insert(stop.user_id);
                continue;
            }
            ExposureAccumulator& acc = s.tracts[home_it->second];
            acc.tdt_s += stop.dwell_s;
            const auto& at = located[i];
            if (!at) {
                acc.unresolved_dwell_s += stop.dwell_s;
                s.diag.dwell_unresolved_s += stop.dwell_s;
                continue;
            }
            const bool away = *at != home_it->second;
            if (away) acc.tdt_nonhome_s += stop.dwell_s;
            for (std::size_t h = 0; h < kHazardCount; ++h) {
                if (!high[h][*at]) continue;
                acc.hdt_s[h] += stop.dwell_s;
                if (away) acc.hdt_nonhome_s[h] += stop.dwell_s;
            }
        }
    });

    Accumulation out;
    out.tracts.resize(n_tracts);
    for (TractId t = 0; t < n_tracts; ++t) out.tracts[t].geoid = index.geoid(t);
    std::unordered_set<std::string_view> dropped;
    for (auto& s : shards) {
        for (TractId t = 0; t < s.tracts.size(); ++t) {
            s.tracts[t].geoid = out.tracts[t].geoid;
            out.tracts[t].merge(s.tracts[t]);
        }
        out.diagnostics.stops_total += s.diag.stops_total;
        out.diagnostics.stops_ignored += s.diag.stops_ignored;
        out.diagnostics.dwell_total_s += s.diag.dwell_total_s;
        out.diagnostics.dwell_ignored_s += s.diag.dwell_ignored_s;
        out.diagnostics.dwell_unresolved_s += s.diag.dwell_unresolved_s;
        dropped.insert(s.dropped.begin(), s.dropped.end());
    }
    out.dropped_users.assign(dropped.begin(), dropped.end());
    std::sort(out.dropped_users.begin(), out.dropped_users.end());
    out.diagnostics.users_dropped = out.dropped_users.size();
    return out;
}

void merge_into(Accumulation& total, const Accumulation& part)
{
    if (total.tracts.empty()) {
        total = part;
        return;
    }
    if (total.tracts.size() != part.tracts.size()) throw std::invalid_argument("accumulations cover different tracts");
    for (std::size_t i = 0; i < total.tracts.size(); ++i) total.tracts[i].merge(part.tracts[i]);
    auto& d = total.diagnostics;
    d.stops_total += part.diagnostics.stops_total;
    d.stops_ignored += part.diagnostics.stops_ignored;
    d.dwell_total_s += part.diagnostics.dwell_total_s;
    d.dwell_ignored_s += part.diagnostics.dwell_ignored_s;
    d.dwell_unresolved_s += part.diagnostics.dwell_unresolved_s;
    std::vector<std::string> users;
    std::set_union(total.dropped_users.begin(), total.dropped_users.end(), part.dropped_users.begin(),
                   part.dropped_users.end(), std::back_inserter(users));
    total.dropped_users = std::move(users);
    d.users_dropped = total.dropped_users.size();
}

MeiTable compute_mei(std::span<const ExposureAccumulator> accumulators)
{
    MeiTable table;
    table.rows.reserve(accumulators.size());
    for (const auto& acc : accumulators) {
        MeiRow row;
        row.geoid = acc.geoid;
        if (acc.tdt_s > 0) {
            const double tdt = static_cast<double>(acc.tdt_s);
            for (std::size_t h = 0; h < kHazardCount; ++h) {
                row.mei[h] = static_cast<double>(acc.hdt_s[h]) / tdt;
                row.nonhome_share[h] = static_cast<double>(acc.hdt_nonhome_s[h]) / tdt;
                if (acc.tdt_nonhome_s > 0) {
                    row.nonhome_conditional[h] =
                        static_cast<double>(acc.hdt_nonhome_s[h]) / static_cast<double>(acc.tdt_nonhome_s);
                }
            }
        }
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const MeiRow& a, const MeiRow& b) { return a.geoid < b.geoid; });
    return table;
}

MeiTable classify_regions(MeiTable table, const HazardMasks& masks)
{
    for (auto& row : table.rows) {
        for (std::size_t h = 0; h < kHazardCount; ++h) {
            if (masks[h].is_high(row.geoid)) {
                row.region[h] = RegionClass::direct;
            } else if (row.mei[h] && *row.mei[h] > 0.0) {
                row.region[h] = RegionClass::latent;
            } else {
                row.region[h] = RegionClass::none;
            }
        }
    }
    return table;
}

namespace {

std::unordered_map<std::string_view, std::int64_t> population_by_geoid(std::span<const CensusTract> tracts)
{
    std::unordered_map<std::string_view, std::int64_t> pop;
    pop.reserve(tracts.size());
    for (const auto& t : tracts) pop.emplace(t.geoid, t.population);
    return pop;
}

std::int64_t lookup(const std::unordered_map<std::string_view, std::int64_t>& pop, const std::string& geoid)
{
    auto it = pop.find(geoid);
    return it == pop.end() ? 0 : it->second;
}

}  // namespace

PopulationCurve population_curve(const MeiTable& table, std::span<const CensusTract> tracts, HazardType hazard,
                                 std::span<const double> thresholds)
{
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw std::invalid_argument("population curve thresholds must be ascending");
    }
    const auto pop = population_by_geoid(tracts);
    const auto h = index_of(hazard);
    PopulationCurve curve;
    curve.hazard = hazard;
    for (double t : thresholds) {
        std::int64_t total = 0;
        for (const auto& row : table.rows) {
            if (row.region[h] == RegionClass::latent && row.mei[h] && *row.mei[h] > t) {
                total += lookup(pop, row.geoid);
            }
        }
        curve.points.emplace_back(t, total);
    }
    return curve;
}

CompoundLatent compound_latent(const MeiTable& table, std::span<const CensusTract> tracts, double threshold)
{
    const auto pop = population_by_geoid(tracts);
    CompoundLatent out;
    for (const auto& row : table.rows) {
        bool all = true;
        for (std::size_t h = 0; h < kHazardCount && all; ++h) {
            all = row.region[h] == RegionClass::latent && row.mei[h] && *row.mei[h] > threshold;
        }
        if (!all) continue;
        out.geoids.push_back(row.geoid);
        out.population += lookup(pop, row.geoid);
    }
    return out;
}

ClassSummaries summarize_classes(const MeiTable& table)
{
    ClassSummaries out{};
    for (std::size_t h = 0; h < kHazardCount; ++h) {
        std::array<double, 3> cond_sum{};
        std::array<std::size_t, 3> cond_n{};
        for (const auto& row : table.rows) {
            if (row.excluded()) continue;
            const auto c = static_cast<std::size_t>(row.region[h]);
            auto& s = out[h][c];
            s.tracts += 1;
            s.mean_mei += *row.mei[h];
            s.mean_nonhome_share += row.nonhome_share[h].value_or(0.0);
            if (row.nonhome_conditional[h]) {
                cond_sum[c] += *row.nonhome_conditional[h];
                cond_n[c] += 1;
            }
        }
        for (std::size_t c = 0; c < 3; ++c) {
            auto& s = out[h][c];
            if (s.tracts > 0) {
                s.mean_mei /= static_cast<double>(s.tracts);
                s.mean_nonhome_share /= static_cast<double>(s.tracts);
            }
            if (cond_n[c] > 0) s.mean_nonhome_conditional = cond_sum[c] / static_cast<double>(cond_n[c]);
        }
    }
    return out;
}

}  // namespace mei
