#pragma once
// Uniform-grid index for assigning coordinates to census tracts.

#include "mei/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mei {

inline constexpr double kDefaultCellSizeDeg = 0.05;

struct BoundingBox {
    double min_lon = 0.0, min_lat = 0.0, max_lon = 0.0, max_lat = 0.0;
    bool contains(double lon, double lat) const
    {
        return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
    }
};

BoundingBox bounding_box(const Geometry& g);

/// Even-odd membership with boundary points counted as inside. Planar in
/// degree space.
bool geometry_contains(const Geometry& g, double lon, double lat);

/// Position of a tract inside TractIndex (tracts are stored sorted by geoid,
/// so comparing ids compares geoids).
using TractId = std::uint32_t;

class TractIndex {
public:
    /// Throws ConfigError on an empty tract list or non-positive cell size.
    TractIndex(std::span<const CensusTract> tracts, double cell_size_deg = kDefaultCellSizeDeg);

    /// Containing tract; smallest geoid wins if geometries overlap.
    std::optional<TractId> locate(double lon, double lat) const;
    std::optional<std::string> locate_geoid(double lon, double lat) const;

    std::optional<TractId> find(std::string_view geoid) const;
    const std::string& geoid(TractId id) const { return geoids_[id]; }
    std::size_t size() const { return geoids_.size(); }
    const std::vector<std::string>& geoids() const { return geoids_; }

    double cell_size_deg() const { return cell_; }
    std::size_t populated_cells() const { return grid_.size(); }
    /// Total number of (cell, tract) entries.
    std::size_t candidate_entries() const;

private:
    std::int64_t cell_x(double lon) const;
    std::int64_t cell_y(double lat) const;
    static std::int64_t key(std::int64_t cx, std::int64_t cy) { return (cx << 32) ^ (cy & 0xffffffff); }

    double cell_;
    double origin_lon_ = 0.0;
    double origin_lat_ = 0.0;
    std::vector<std::string> geoids_;  // sorted
    std::vector<Geometry> geometries_;
    std::vector<BoundingBox> boxes_;
    std::unordered_map<std::int64_t, std::vector<TractId>> grid_;  // candidates sorted by id
};

/// Locates every stop; nullopt for stops outside all tracts. Parallel over
/// contiguous chunks, result order matches input order.
std::vector<std::optional<TractId>> locate_all(const TractIndex& index,
                                               std::span<const StopRecord> stops,
                                               unsigned threads = 1);

}  // namespace mei
