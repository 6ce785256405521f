#pragma once
// Synthetic worlds with planted ground truth.
//
// A world is a grid of square tracts grouped into square counties. Hazard
// fields are Gaussian noise box-smoothed over `hazard_autocorr` cells and
// ranked to percentiles. Each user has a planted home; nighttime stops
// (every fourth stop, 22:00 onwards) are placed at home and daytime stops at a
// tract drawn with probability proportional to (1 + d)^-decay_alpha, d being
// the Euclidean distance in cells from home.

#include "mei/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mei {

/// Deterministic generator with named, independent streams. Draws are defined
/// here rather than by std:: distributions so output is identical across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double normal();

private:
    std::mt19937_64 engine_;
};

enum class DemographicMode {
    uniform,      // identical values in every tract
    independent,  // random, unrelated to hazards
    planted       // rises with proximity to hazard hot spots
};

std::string_view to_string(DemographicMode m);
std::optional<DemographicMode> parse_demographic_mode(std::string_view s);

struct WorldConfig {
    std::uint64_t seed = 1;
    int grid_n = 10;
    int county_side = 5;
    double tract_deg = 0.01;
    double origin_lon = -95.0;
    double origin_lat = 29.0;
    int hazard_autocorr = 1;
    /// Weight of a noise field common to all three hazards, in [0, 1].
    double hazard_shared = 0.0;
    double decay_alpha = 2.0;
    int users = 100;
    int stops_per_user = 20;
    bool archetype_mode = false;
    int archetype_block = 4;
    DemographicMode demographics = DemographicMode::independent;
};

/// Throws ConfigError on invalid values.
void check_world_config(const WorldConfig& cfg);

inline constexpr Timestamp kWorldEpoch = 1554076800;  // 2019-04-01T00:00:00Z
inline constexpr int kWorldDays = 30;
inline constexpr std::int64_t kNightDwellMin = 21600, kNightDwellMax = 27000;
inline constexpr std::int64_t kDayDwellMin = 600, kDayDwellMax = 10800;

struct World {
    WorldConfig config;
    std::vector<CensusTract> tracts;  // row-major over the grid
    PerHazard<HazardLayer> hazards;   // values only
    std::vector<StopRecord> stops;
    std::map<std::string, std::string> planted_homes;  // user_id -> geoid
    std::vector<int> archetypes;                        // per tract, bit h set = high for hazard h; empty unless archetype_mode

    int row_of(std::size_t tract) const { return static_cast<int>(tract) / config.grid_n; }
    int col_of(std::size_t tract) const { return static_cast<int>(tract) % config.grid_n; }
};

World gen_world(const WorldConfig& cfg);

/// Visit probabilities over `n` positions for a given home under the decay law.
std::vector<double> visit_probabilities(std::span<const std::pair<double, double>> positions, std::size_t home,
                                        double decay_alpha);

/// Share of expected dwell spent on nighttime (home) stops for a user with
/// `stops_per_user` stops.
double night_dwell_share(int stops_per_user);

/// Expected MEI of a resident of `home`, as a ratio of expected dwell sums.
double expected_mei_for_home(std::span<const std::pair<double, double>> positions, std::span<const char> high,
                             std::size_t home, double decay_alpha, int stops_per_user);

struct PlantedTruth {
    std::map<std::string, std::string> homes;
    /// Expected MEI for a resident of each tract, by exhaustive enumeration of destinations.
    std::map<std::string, PerHazard<double>> expected_mei;
    std::map<std::string, int> archetype;  // empty unless archetype_mode
    HazardMasks masks;
};

/// Uses the default classification rules (percentile > 0.5, per-county heat quartile).
PlantedTruth planted_truth(const World& world);
PlantedTruth planted_truth(const World& world, const HazardMasks& masks);

/// Fraction of rook-adjacent tract pairs whose mask flags agree.
double neighbor_mask_agreement(const World& world, const HazardLayer& mask);

/// Writes stops.csv, tracts.geojson, hazard_{air,toxic,heat}.csv plus
/// truth_homes.csv and truth_mei.csv. Creates `dir` if needed.
void write_world(const World& world, const std::filesystem::path& dir);

}  // namespace mei
