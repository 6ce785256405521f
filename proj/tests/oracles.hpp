#pragma once
// Independent reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond the data types.

#include "mei/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

// ---- point in polygon: boundary check, then winding number per ring ----

inline bool on_segment(const mei::LonLat& a, const mei::LonLat& b, double x, double y)
{
    const double cross = (b.lon - a.lon) * (y - a.lat) - (b.lat - a.lat) * (x - a.lon);
    if (cross != 0.0) return false;
    return x >= std::min(a.lon, b.lon) && x <= std::max(a.lon, b.lon) && y >= std::min(a.lat, b.lat) &&
           y <= std::max(a.lat, b.lat);
}

inline int winding_number(const mei::Ring& ring, double x, double y)
{
    int wn = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const auto& a = ring[i];
        const auto& b = ring[i + 1];
        const double side = (b.lon - a.lon) * (y - a.lat) - (x - a.lon) * (b.lat - a.lat);
        if (a.lat <= y) {
            if (b.lat > y && side > 0) ++wn;
        } else {
            if (b.lat <= y && side < 0) --wn;
        }
    }
    return wn;
}

/// Boundary-inclusive: on any ring edge counts as inside. Otherwise inside the
/// shell and outside every hole.
inline bool polygon_contains(const mei::Polygon& poly, double x, double y)
{
    for (const auto& ring : poly.rings) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            if (on_segment(ring[i], ring[i + 1], x, y)) return true;
        }
    }
    if (poly.rings.empty() || winding_number(poly.rings[0], x, y) == 0) return false;
    for (std::size_t h = 1; h < poly.rings.size(); ++h) {
        if (winding_number(poly.rings[h], x, y) != 0) return false;
    }
    return true;
}

/// Exhaustive scan; smallest geoid among containing tracts.
inline std::optional<std::string> scan_locate(const std::vector<mei::CensusTract>& tracts, double x, double y)
{
    std::optional<std::string> best;
    for (const auto& t : tracts) {
        for (const auto& part : t.geometry.parts) {
            if (polygon_contains(part, x, y)) {
                if (!best || t.geoid < *best) best = t.geoid;
                break;
            }
        }
    }
    return best;
}

// ---- exposure: one pass over the records, integer sums, one division ----

struct ReferenceRow {
    std::int64_t tdt = 0;
    std::array<std::int64_t, 3> hdt{};
    std::int64_t tdt_nonhome = 0;
    std::array<std::int64_t, 3> hdt_nonhome{};
};

inline std::map<std::string, ReferenceRow> reference_exposure(const std::vector<mei::StopRecord>& stops,
                                                              const std::map<std::string, std::string>& homes,
                                                              const std::vector<mei::CensusTract>& tracts,
                                                              const std::array<std::map<std::string, bool>, 3>& masks)
{
    std::map<std::string, ReferenceRow> rows;
    for (const auto& s : stops) {
        auto home = homes.find(s.user_id);
        if (home == homes.end()) continue;
        auto& row = rows[home->second];
        row.tdt += s.dwell_s;
        const auto where = scan_locate(tracts, s.lon, s.lat);
        if (!where) continue;
        const bool away = *where != home->second;
        if (away) row.tdt_nonhome += s.dwell_s;
        for (int h = 0; h < 3; ++h) {
            auto m = masks[h].find(*where);
            if (m != masks[h].end() && m->second) {
                row.hdt[h] += s.dwell_s;
                if (away) row.hdt_nonhome[h] += s.dwell_s;
            }
        }
    }
    return rows;
}

// ---- DBSCAN: union-find over core points ----

struct ReferenceDbscan {
    std::vector<int> labels;  // -1 noise, otherwise a component id
    std::vector<bool> core;
};

/// Points must be in scan order. Core points within eps of each other share a
/// component; a border point takes the component whose smallest core index is
/// lowest among its core neighbours.
inline ReferenceDbscan reference_dbscan(const std::vector<std::array<double, 3>>& pts, double eps, int min_pts)
{
    const std::size_t n = pts.size();
    auto close = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
        return s <= eps * eps;
    };
    ReferenceDbscan out;
    out.core.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        int c = 0;
        for (std::size_t j = 0; j < n; ++j) c += close(i, j) ? 1 : 0;
        out.core[i] = c >= min_pts;
    }
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.core[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (out.core[j] && close(i, j)) {
                const auto a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    // Root with the smallest index is the component's smallest core index.
    std::vector<std::size_t> min_core(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.core[i]) min_core[find(i)] = std::min(min_core[find(i)], i);
    }
    out.labels.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.core[i]) {
            out.labels[i] = static_cast<int>(min_core[find(i)]);
            continue;
        }
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (out.core[j] && close(i, j)) best = std::min(best, min_core[find(j)]);
        }
        if (best < n) out.labels[i] = static_cast<int>(best);
    }
    return out;
}

/// Relabels clusters 0, 1, ... by first appearance; -1 stays -1.
inline std::vector<int> canonical_labels(const std::vector<int>& labels)
{
    std::map<int, int> remap;
    std::vector<int> out;
    for (int l : labels) {
        if (l < 0) {
            out.push_back(-1);
            continue;
        }
        auto it = remap.emplace(l, static_cast<int>(remap.size())).first;
        out.push_back(it->second);
    }
    return out;
}

// ---- Pearson r from raw power sums ----

inline double pearson_sums(const std::vector<double>& x, const std::vector<double>& y)
{
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const long double n = static_cast<long double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double num = n * sxy - sx * sy;
    const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    return static_cast<double>(num / den);
}

}  // namespace oracle
