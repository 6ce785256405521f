#pragma once
// Small builders shared by the unit tests.

#include "mei/model.hpp"

#include <filesystem>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fixture {

inline mei::Ring rect_ring(double x0, double y0, double x1, double y1)
{
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
}

inline mei::CensusTract square_tract(std::string geoid, double x0, double y0, double side = 1.0,
                                     std::int64_t pop = 1000, double minority = 0.3, double poverty = 0.2)
{
    mei::CensusTract t;
    t.county_fips = geoid.substr(0, 5);
    t.geoid = std::move(geoid);
    t.geometry.parts.push_back({{rect_ring(x0, y0, x0 + side, y0 + side)}});
    t.population = pop;
    t.pct_minority = minority;
    t.pct_below_poverty200 = poverty;
    return t;
}

/// n x n unit squares starting at (0, 0); geoid 480010000RC-style, row-major.
inline std::vector<mei::CensusTract> grid_tracts(int n, double side = 1.0)
{
    std::vector<mei::CensusTract> out;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "48001%06d", r * n + c);
            out.push_back(square_tract(buf, c * side, r * side, side));
        }
    }
    return out;
}

/// Irregular 100-tract fixture: a 9 x 11 grid of jittered quadrilaterals
/// (neighbours share edges exactly) plus one island tract sitting in a hole
/// cut from the central quad. Coordinates span roughly [0, 11] x [0, 9].
inline std::vector<mei::CensusTract> irregular_tracts(std::uint64_t seed = 7)
{
    const int rows = 9, cols = 11;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    std::vector<std::vector<mei::LonLat>> v(rows + 1, std::vector<mei::LonLat>(cols + 1));
    for (int r = 0; r <= rows; ++r) {
        for (int c = 0; c <= cols; ++c) {
            const bool edge = r == 0 || c == 0 || r == rows || c == cols;
            v[r][c] = {c + (edge ? 0.0 : jitter(rng)), r + (edge ? 0.0 : jitter(rng))};
        }
    }
    std::vector<mei::CensusTract> out;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "48%03d%06d", 1 + 2 * (c / 4), r * cols + c);
            mei::CensusTract t;
            t.geoid = buf;
            t.county_fips = t.geoid.substr(0, 5);
            t.population = 1000 + 10 * (r * cols + c);
            t.pct_minority = 0.3;
            t.pct_below_poverty200 = 0.2;
            mei::Polygon poly;
            poly.rings.push_back({v[r][c], v[r][c + 1], v[r + 1][c + 1], v[r + 1][c], v[r][c]});
            out.push_back(std::move(t));
            out.back().geometry.parts.push_back(std::move(poly));
        }
    }
    // Central quad (row 4, col 5) gets a square hole; the island fills it.
    auto& center = out[4 * cols + 5];
    const double cx = 0.25 * (v[4][5].lon + v[4][6].lon + v[5][5].lon + v[5][6].lon);
    const double cy = 0.25 * (v[4][5].lat + v[4][6].lat + v[5][5].lat + v[5][6].lat);
    center.geometry.parts[0].rings.push_back(rect_ring(cx - 0.15, cy - 0.15, cx + 0.15, cy + 0.15));
    mei::CensusTract island = square_tract("48099000999", cx - 0.15, cy - 0.15, 0.3);
    out.push_back(std::move(island));
    return out;
}

inline mei::StopRecord stop(std::string user, double lon, double lat, mei::Timestamp ts, std::int64_t dwell)
{
    return {std::move(user), lon, lat, ts, dwell};
}

inline mei::HazardLayer layer(mei::HazardType type, std::vector<std::pair<std::string, double>> values)
{
    mei::HazardLayer l;
    l.type = type;
    for (auto& [g, v] : values) l.values.emplace(std::move(g), v);
    return l;
}

inline mei::HazardLayer mask_layer(mei::HazardType type, std::vector<std::pair<std::string, bool>> flags)
{
    mei::HazardLayer l;
    l.type = type;
    for (auto& [g, f] : flags) {
        l.values.emplace(g, f ? 1.0 : 0.0);
        l.mask.emplace(std::move(g), f);
    }
    return l;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("mei_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace fixture
