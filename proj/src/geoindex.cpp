#include "mei/geoindex.hpp"

#include "mei/error.hpp"
#include "mei/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mei {

BoundingBox bounding_box(const Geometry& g)
{
    BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& poly : g.parts) {
        for (const auto& ring : poly.rings) {
            for (const auto& p : ring) {
                b.min_lon = std::min(b.min_lon, p.lon);
                b.min_lat = std::min(b.min_lat, p.lat);
                b.max_lon = std::max(b.max_lon, p.lon);
                b.max_lat = std::max(b.max_lat, p.lat);
            }
        }
    }
    return b;
}

namespace {

bool on_segment(const LonLat& a, const LonLat& b, double x, double y)
{
    if (x < std::min(a.lon, b.lon) || x > std::max(a.lon, b.lon) || y < std::min(a.lat, b.lat) ||
        y > std::max(a.lat, b.lat)) {
        return false;
    }
    const double cross = (b.lon - a.lon) * (y - a.lat) - (b.lat - a.lat) * (x - a.lon);
    return cross == 0.0;
}

}  // namespace

bool geometry_contains(const Geometry& g, double lon, double lat)
{
    for (const auto& poly : g.parts) {
        bool inside = false;
        for (const auto& ring : poly.rings) {
            for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
                const LonLat& a = ring[j];
                const LonLat& b = ring[i];
                if (on_segment(a, b, lon, lat)) return true;
                if ((a.lat > lat) != (b.lat > lat)) {
                    const double x_cross = a.lon + (lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                    if (lon < x_cross) inside = !inside;
                }
            }
        }
        if (inside) return true;
    }
    return false;
}

TractIndex::TractIndex(std::span<const CensusTract> tracts, double cell_size_deg)
    : cell_(cell_size_deg)
{
    if (tracts.empty()) throw ConfigError("cannot build a tract index from an empty tract list");
    if (!(cell_size_deg > 0.0) || !std::isfinite(cell_size_deg)) {
        throw ConfigError("cell size must be positive");
    }

    std::vector<std::size_t> order(tracts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return tracts[a].geoid < tracts[b].geoid; });

    geoids_.reserve(tracts.size());
    geometries_.reserve(tracts.size());
    boxes_.reserve(tracts.size());
    origin_lon_ = std::numeric_limits<double>::infinity();
    origin_lat_ = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
        if (!geoids_.empty() && geoids_.back() == tracts[i].geoid) {
            throw ConfigError("duplicate tract geoid " + tracts[i].geoid);
        }
        geoids_.push_back(tracts[i].geoid);
        geometries_.push_back(tracts[i].geometry);
        boxes_.push_back(bounding_box(tracts[i].geometry));
        origin_lon_ = std::min(origin_lon_, boxes_.back().min_lon);
        origin_lat_ = std::min(origin_lat_, boxes_.back().min_lat);
    }

    for (TractId id = 0; id < boxes_.size(); ++id) {
        const auto& b = boxes_[id];
        if (!(b.min_lon <= b.max_lon)) continue;  // geometry without vertices
        for (auto cx = cell_x(b.min_lon); cx <= cell_x(b.max_lon); ++cx) {
            for (auto cy = cell_y(b.min_lat); cy <= cell_y(b.max_lat); ++cy) {
                grid_[key(cx, cy)].push_back(id);  // ids ascend, lists stay sorted
            }
        }
    }
}

std::int64_t TractIndex::cell_x(double lon) const
{
    return static_cast<std::int64_t>(std::floor((lon - origin_lon_) / cell_));
}

std::int64_t TractIndex::cell_y(double lat) const
{
    return static_cast<std::int64_t>(std::floor((lat - origin_lat_) / cell_));
}

std::optional<TractId> TractIndex::locate(double lon, double lat) const
{
    auto it = grid_.find(key(cell_x(lon), cell_y(lat)));
    if (it == grid_.end()) return std::nullopt;
    for (TractId id : it->second) {
        if (boxes_[id].contains(lon, lat) && geometry_contains(geometries_[id], lon, lat)) return id;
    }
    return std::nullopt;
}

std::optional<std::string> TractIndex::locate_geoid(double lon, double lat) const
{
    if (auto id = locate(lon, lat)) return geoids_[*id];
    return std::nullopt;
}

std::optional<TractId> TractIndex::find(std::string_view geoid) const
{
    auto it = std::lower_bound(geoids_.begin(), geoids_.end(), geoid);
    if (it == geoids_.end() || *it != geoid) return std::nullopt;
    return static_cast<TractId>(it - geoids_.begin());
}

std::size_t TractIndex::candidate_entries() const
{
    std::size_t n = 0;
    for (const auto& [_, ids] : grid_) n += ids.size();
    return n;
}

std::vector<std::optional<TractId>> locate_all(const TractIndex& index, std::span<const StopRecord> stops,
                                               unsigned threads)
{
    std::vector<std::optional<TractId>> out(stops.size());
    parallel_chunks(stops.size(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = index.locate(stops[i].lon, stops[i].lat);
    });
    return out;
}

}  // namespace mei
