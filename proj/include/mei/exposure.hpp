#pragma once
// Dwell-time accumulation and the mobility-based exposure index.
//
// For a tract, TDT sums the dwell of every stop made by its residents and HDT
// the part of it spent at stops inside high-hazard tracts; MEI = HDT / TDT.
// Stops outside every known tract count toward TDT only. Stops by users
// without a home are dropped and reported.

#include "mei/geoindex.hpp"
#include "mei/homeloc.hpp"
#include "mei/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mei {

struct AccumulationDiagnostics {
    std::size_t stops_total = 0;
    std::size_t stops_ignored = 0;  // users without a home
    std::size_t users_dropped = 0;
    std::int64_t dwell_total_s = 0;
    std::int64_t dwell_ignored_s = 0;
    std::int64_t dwell_unresolved_s = 0;  // counted in TDT, outside all tracts

    friend bool operator==(const AccumulationDiagnostics&, const AccumulationDiagnostics&) = default;
};

struct Accumulation {
    /// One entry per indexed tract, in geoid order, including tracts with no residents.
    std::vector<ExposureAccumulator> tracts;
    AccumulationDiagnostics diagnostics;
    std::vector<std::string> dropped_users;  // sorted
};

Accumulation accumulate(std::span<const StopRecord> stops, const HomeMap& homes, const TractIndex& index,
                        const HazardMasks& masks, unsigned threads = 1);

/// Same, with stop locations already resolved. The stop set is split into
/// `threads` contiguous shards whose integer sums are merged, so the result
/// does not depend on the thread count.
Accumulation accumulate(std::span<const StopRecord> stops, std::span<const std::optional<TractId>> located,
                        const HomeMap& homes, const TractIndex& index, const HazardMasks& masks,
                        unsigned threads = 1);

/// Adds `part` into `total` tract by tract (both in the same geoid order).
void merge_into(Accumulation& total, const Accumulation& part);

MeiTable compute_mei(std::span<const ExposureAccumulator> accumulators);

/// direct: tract is high-hazard; latent: not high-hazard but MEI > 0; none otherwise.
MeiTable classify_regions(MeiTable table, const HazardMasks& masks);

struct PopulationCurve {
    HazardType hazard = HazardType::air_pollution;
    std::vector<std::pair<double, std::int64_t>> points;  // (threshold, population)
};

/// Population of latent tracts with MEI strictly above each threshold.
/// Thresholds must be ascending; throws std::invalid_argument otherwise.
PopulationCurve population_curve(const MeiTable& table, std::span<const CensusTract> tracts, HazardType hazard,
                                 std::span<const double> thresholds);

struct CompoundLatent {
    std::vector<std::string> geoids;
    std::int64_t population = 0;
};

/// Tracts latent for all three hazards with every MEI above `threshold`.
CompoundLatent compound_latent(const MeiTable& table, std::span<const CensusTract> tracts, double threshold);

/// Means over the non-excluded tracts of one region class.
struct ClassSummary {
    std::size_t tracts = 0;
    double mean_mei = 0.0;
    double mean_nonhome_share = 0.0;
    /// Over tracts whose residents have any non-home dwell.
    std::optional<double> mean_nonhome_conditional;
};

/// Indexed [hazard][RegionClass].
using ClassSummaries = PerHazard<std::array<ClassSummary, 3>>;

ClassSummaries summarize_classes(const MeiTable& table);

}  // namespace mei
