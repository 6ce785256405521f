#pragma once
// Shared domain types for the mobility-based exposure engine.
//
// Everything here is plain data. Dwell times are integer seconds so that
// tract sums are exact and independent of summation order.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mei {

enum class HazardType : std::uint8_t { air_pollution = 0, toxic = 1, heat = 2 };

inline constexpr std::size_t kHazardCount = 3;
inline constexpr std::array<HazardType, kHazardCount> kHazards = {
    HazardType::air_pollution, HazardType::toxic, HazardType::heat};

/// Per-hazard storage indexed by HazardType.
template <class T>
using PerHazard = std::array<T, kHazardCount>;

constexpr std::size_t index_of(HazardType h) { return static_cast<std::size_t>(h); }

/// Canonical name ("air_pollution", "toxic", "heat").
std::string_view to_string(HazardType h);
/// Short column suffix ("air", "toxic", "heat").
std::string_view short_name(HazardType h);
/// Accepts canonical and short names.
std::optional<HazardType> parse_hazard_type(std::string_view s);

/// Unix seconds, UTC.
using Timestamp = std::int64_t;

struct StopRecord {
    std::string user_id;
    double lon = 0.0;
    double lat = 0.0;
    Timestamp start_ts = 0;
    std::int64_t dwell_s = 0;

    friend bool operator==(const StopRecord&, const StopRecord&) = default;
};

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
    friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Closed ring: front() == back().
using Ring = std::vector<LonLat>;

/// First ring is the shell, the rest are holes. Membership uses the even-odd
/// rule over all rings, so holes need no special handling.
struct Polygon {
    std::vector<Ring> rings;
    friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Polygon or MultiPolygon; a point is inside if it is inside any part.
struct Geometry {
    std::vector<Polygon> parts;
    friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct CensusTract {
    std::string geoid;        // 11 characters
    std::string county_fips;  // geoid.substr(0, 5)
    Geometry geometry;
    std::int64_t population = 0;
    double pct_minority = 0.0;          // fraction
    double pct_below_poverty200 = 0.0;  // fraction

    friend bool operator==(const CensusTract&, const CensusTract&) = default;
};

struct HazardLayer {
    HazardType type = HazardType::air_pollution;
    std::map<std::string, double> values;
    std::map<std::string, bool> mask;

    /// Tracts without a mask entry are not high-hazard.
    bool is_high(const std::string& geoid) const;

    friend bool operator==(const HazardLayer&, const HazardLayer&) = default;
};

using HazardMasks = PerHazard<HazardLayer>;

struct ExposureAccumulator {
    std::string geoid;
    std::int64_t tdt_s = 0;
    PerHazard<std::int64_t> hdt_s{};
    std::int64_t tdt_nonhome_s = 0;
    PerHazard<std::int64_t> hdt_nonhome_s{};
    std::int64_t unresolved_dwell_s = 0;

    /// Field-wise integer sum; geoid must match.
    void merge(const ExposureAccumulator& other);

    friend bool operator==(const ExposureAccumulator&, const ExposureAccumulator&) = default;
};

enum class RegionClass : std::uint8_t { none = 0, direct = 1, latent = 2 };

std::string_view to_string(RegionClass c);
std::optional<RegionClass> parse_region_class(std::string_view s);

struct MeiRow {
    std::string geoid;
    PerHazard<std::optional<double>> mei{};
    PerHazard<std::optional<double>> nonhome_share{};
    PerHazard<std::optional<double>> nonhome_conditional{};
    PerHazard<RegionClass> region{};
    int cluster_label = -1;

    /// Tracts with no resident dwell have no MEI and drop out of statistics.
    bool excluded() const { return !mei[0].has_value(); }
    bool all_defined() const { return mei[0] && mei[1] && mei[2]; }

    friend bool operator==(const MeiRow&, const MeiRow&) = default;
};

/// Rows are kept sorted by geoid.
struct MeiTable {
    std::vector<MeiRow> rows;

    const MeiRow* find(std::string_view geoid) const;
    MeiRow* find(std::string_view geoid);

    friend bool operator==(const MeiTable&, const MeiTable&) = default;
};

struct Violation {
    std::string field;
    std::string rule;
    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate(const StopRecord& r);
std::vector<Violation> validate(const CensusTract& t);
std::vector<Violation> validate(const HazardLayer& layer);
std::vector<Violation> validate(const ExposureAccumulator& acc);
/// Checks the row-level MEI invariants that do not need the source accumulator.
std::vector<Violation> validate(const MeiRow& row, const HazardMasks& masks);

}  // namespace mei
