#include "mei/synth.hpp"

#include "mei/error.hpp"
#include "mei/hazardclass.hpp"
#include "mei/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace mei {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::string_view name, std::uint64_t index)
{
    return Rng(splitmix64(splitmix64(seed) ^ fnv1a64(name) ^ splitmix64(index + 0x51ed27)));
}

double Rng::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi <= lo) return lo;
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit span
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
}

double Rng::normal()
{
    // Box-Muller, one variate per call.
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::string_view to_string(DemographicMode m)
{
    switch (m) {
        case DemographicMode::uniform: return "uniform";
        case DemographicMode::independent: return "independent";
        case DemographicMode::planted: return "planted";
    }
    return "unknown";
}

std::optional<DemographicMode> parse_demographic_mode(std::string_view s)
{
    for (auto m : {DemographicMode::uniform, DemographicMode::independent, DemographicMode::planted}) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

void check_world_config(const WorldConfig& c)
{
    if (c.grid_n < 1) throw ConfigError("grid_n must be positive");
    if (c.grid_n > 1000) throw ConfigError("grid_n above 1000 is not supported");
    if (c.county_side < 1) throw ConfigError("county_side must be positive");
    const int counties_per_side = (c.grid_n + c.county_side - 1) / c.county_side;
    if (counties_per_side * counties_per_side > 500) throw ConfigError("too many counties for 3-digit county codes");
    if (!(c.tract_deg > 0.0) || c.tract_deg * 1e6 < 10.0) throw ConfigError("tract_deg must be at least 1e-5");
    if (c.origin_lon < -180.0 || c.origin_lon + c.grid_n * c.tract_deg > 180.0 || c.origin_lat < -90.0 ||
        c.origin_lat + c.grid_n * c.tract_deg > 90.0) {
        throw ConfigError("grid does not fit inside WGS84 bounds");
    }
    if (c.hazard_autocorr < 0) throw ConfigError("hazard_autocorr must be non-negative");
    if (!(c.hazard_shared >= 0.0 && c.hazard_shared <= 1.0)) throw ConfigError("hazard_shared must lie in [0, 1]");
    if (!(c.decay_alpha > 0.0)) throw ConfigError("decay_alpha must be positive");
    if (c.users < 1) throw ConfigError("users must be positive");
    if (c.stops_per_user < 1) throw ConfigError("stops_per_user must be positive");
    if (c.archetype_block < 1) throw ConfigError("archetype_block must be positive");
}

std::vector<double> visit_probabilities(std::span<const std::pair<double, double>> positions, std::size_t home,
                                        double decay_alpha)
{
    std::vector<double> w(positions.size());
    double total = 0.0;
    for (std::size_t g = 0; g < positions.size(); ++g) {
        const double dx = positions[g].first - positions[home].first;
        const double dy = positions[g].second - positions[home].second;
        w[g] = std::pow(1.0 + std::sqrt(dx * dx + dy * dy), -decay_alpha);
        total += w[g];
    }
    for (double& x : w) x /= total;
    return w;
}

namespace {

int night_stop_count(int stops_per_user) { return (stops_per_user + 3) / 4; }

bool is_night_stop(int j) { return j % 4 == 0; }

}  // namespace

double night_dwell_share(int stops_per_user)
{
    const double nights = night_stop_count(stops_per_user);
    const double days = stops_per_user - nights;
    const double night_mean = 0.5 * static_cast<double>(kNightDwellMin + kNightDwellMax);
    const double day_mean = 0.5 * static_cast<double>(kDayDwellMin + kDayDwellMax);
    return nights * night_mean / (nights * night_mean + days * day_mean);
}

double expected_mei_for_home(std::span<const std::pair<double, double>> positions, std::span<const char> high,
                             std::size_t home, double decay_alpha, int stops_per_user)
{
    const auto p = visit_probabilities(positions, home, decay_alpha);
    double day_hazard = 0.0;
    for (std::size_t g = 0; g < p.size(); ++g) {
        if (high[g]) day_hazard += p[g];
    }
    const double w = night_dwell_share(stops_per_user);
    return w * (high[home] ? 1.0 : 0.0) + (1.0 - w) * day_hazard;
}

namespace {

std::vector<double> box_smooth(const std::vector<double>& field, int n, int radius)
{
    if (radius == 0) return field;
    std::vector<double> out(field.size());
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            int cnt = 0;
            for (int rr = std::max(0, r - radius); rr <= std::min(n - 1, r + radius); ++rr) {
                for (int cc = std::max(0, c - radius); cc <= std::min(n - 1, c + radius); ++cc) {
                    s += field[static_cast<std::size_t>(rr * n + cc)];
                    ++cnt;
                }
            }
            out[static_cast<std::size_t>(r * n + c)] = s / cnt;
        }
    }
    return out;
}

/// (rank + 1) / n, ties broken by position.
std::vector<double> percentile_ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> pct(v.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        pct[order[r]] = static_cast<double>(r + 1) / static_cast<double>(v.size());
    }
    return pct;
}

/// 0.7^d, d being the king-move distance in cells to the nearest tract whose
/// combined hazard rank is in the top fifth.
std::vector<double> hot_spot_proximity(const std::vector<double>& rank, int n)
{
    constexpr double kHotRank = 0.8;
    constexpr double kHalo = 0.7;
    std::vector<int> dist(rank.size(), -1);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < rank.size(); ++i) {
        if (rank[i] > kHotRank) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int r = static_cast<int>(queue[head]) / n, c = static_cast<int>(queue[head]) % n;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr, cc = c + dc;
                if (rr < 0 || cc < 0 || rr >= n || cc >= n) continue;
                const auto j = static_cast<std::size_t>(rr * n + cc);
                if (dist[j] >= 0) continue;
                dist[j] = dist[queue[head]] + 1;
                queue.push_back(j);
            }
        }
    }
    std::vector<double> prox(rank.size(), 0.0);
    for (std::size_t i = 0; i < rank.size(); ++i) {
        if (dist[i] >= 0) prox[i] = std::pow(kHalo, dist[i]);
    }
    return prox;
}

std::int64_t to_micro(double deg) { return static_cast<std::int64_t>(std::llround(deg * 1e6)); }

double from_micro(std::int64_t micro) { return static_cast<double>(micro) / 1e6; }

std::vector<std::pair<double, double>> cell_centers(int n)
{
    std::vector<std::pair<double, double>> pos;
    pos.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) pos.emplace_back(c + 0.5, r + 0.5);
    }
    return pos;
}

std::vector<int> assign_archetypes(const WorldConfig& cfg)
{
    const int blocks_per_side = (cfg.grid_n + cfg.archetype_block - 1) / cfg.archetype_block;
    const int blocks = blocks_per_side * blocks_per_side;
    // All-high archetype gets 3/10 of the blocks, the other seven share the rest.
    std::vector<int> labels;
    const int all_high = static_cast<int>(std::lround(0.3 * blocks));
    labels.assign(static_cast<std::size_t>(all_high), 7);
    for (int i = 0; static_cast<int>(labels.size()) < blocks; ++i) labels.push_back(i % 7);
    Rng rng = Rng::stream(cfg.seed, "archetype");
    for (std::size_t i = labels.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
        std::swap(labels[i - 1], labels[j]);
    }
    std::vector<int> per_tract(static_cast<std::size_t>(cfg.grid_n) * cfg.grid_n);
    for (int r = 0; r < cfg.grid_n; ++r) {
        for (int c = 0; c < cfg.grid_n; ++c) {
            const int b = (r / cfg.archetype_block) * blocks_per_side + c / cfg.archetype_block;
            per_tract[static_cast<std::size_t>(r * cfg.grid_n + c)] = labels[static_cast<std::size_t>(b)];
        }
    }
    return per_tract;
}

std::string make_geoid(int county_code, std::size_t tract_index)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "48%03d%06zu", county_code, tract_index);
    return buf;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

World gen_world(const WorldConfig& cfg)
{
    check_world_config(cfg);
    const int n = cfg.grid_n;
    const std::size_t n_tracts = static_cast<std::size_t>(n) * n;

    World world;
    world.config = cfg;

    // ---- geometry ----
    const std::int64_t side = to_micro(cfg.tract_deg);
    const std::int64_t lon0 = to_micro(cfg.origin_lon);
    const std::int64_t lat0 = to_micro(cfg.origin_lat);
    const int counties_per_side = (n + cfg.county_side - 1) / cfg.county_side;
    world.tracts.resize(n_tracts);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const auto i = static_cast<std::size_t>(r * n + c);
            const int county = cfg.archetype_mode ? 0 : (r / cfg.county_side) * counties_per_side + c / cfg.county_side;
            CensusTract& t = world.tracts[i];
            t.geoid = make_geoid(2 * county + 1, i);
            t.county_fips = t.geoid.substr(0, 5);
            const double x0 = from_micro(lon0 + c * side), x1 = from_micro(lon0 + (c + 1) * side);
            const double y0 = from_micro(lat0 + r * side), y1 = from_micro(lat0 + (r + 1) * side);
            t.geometry.parts = {Polygon{{Ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}}};
        }
    }

    // ---- hazards ----
    PerHazard<std::vector<double>> pct;
    std::vector<double> proximity(n_tracts, 0.0);
    for (auto& layer : world.hazards) layer.mask.clear();
    for (HazardType h : kHazards) world.hazards[index_of(h)].type = h;

    if (cfg.archetype_mode) {
        world.archetypes = assign_archetypes(cfg);
        Rng rng = Rng::stream(cfg.seed, "hazard");
        for (std::size_t i = 0; i < n_tracts; ++i) {
            const int a = world.archetypes[i];
            for (HazardType h : {HazardType::air_pollution, HazardType::toxic}) {
                const bool hi = (a >> index_of(h)) & 1;
                const double u = rng.uniform01();
                world.hazards[index_of(h)].values[world.tracts[i].geoid] = hi ? 0.75 + 0.25 * u : 0.25 * u;
            }
            const bool heat_hi = (a >> index_of(HazardType::heat)) & 1;
            world.hazards[index_of(HazardType::heat)].values[world.tracts[i].geoid] =
                heat_hi ? 40.0 : static_cast<double>(rng.uniform_int(0, 20));
            proximity[i] = std::popcount(static_cast<unsigned>(a)) / 3.0;
        }
    } else {
        Rng shared_rng = Rng::stream(cfg.seed, "hazard.shared");
        std::vector<double> shared(n_tracts);
        for (auto& v : shared) v = shared_rng.normal();
        const double ws = std::sqrt(cfg.hazard_shared);
        const double wo = std::sqrt(1.0 - cfg.hazard_shared);
        std::vector<double> combined(n_tracts, 0.0);
        for (HazardType h : kHazards) {
            Rng rng = Rng::stream(cfg.seed, "hazard", index_of(h));
            std::vector<double> raw(n_tracts);
            for (std::size_t i = 0; i < n_tracts; ++i) raw[i] = ws * shared[i] + wo * rng.normal();
            const auto smooth = box_smooth(raw, n, cfg.hazard_autocorr);
            pct[index_of(h)] = percentile_ranks(smooth);
            for (std::size_t i = 0; i < n_tracts; ++i) combined[i] += smooth[i];
        }
        proximity = hot_spot_proximity(percentile_ranks(combined), n);
        for (std::size_t i = 0; i < n_tracts; ++i) {
            const auto& g = world.tracts[i].geoid;
            world.hazards[index_of(HazardType::air_pollution)].values[g] = pct[0][i];
            world.hazards[index_of(HazardType::toxic)].values[g] = pct[1][i];
            world.hazards[index_of(HazardType::heat)].values[g] = static_cast<double>(std::lround(5.0 + 45.0 * pct[2][i]));
        }
    }

    // ---- demographics ----
    {
        Rng pop_rng = Rng::stream(cfg.seed, "population");
        Rng demo_rng = Rng::stream(cfg.seed, "demographics");
        for (std::size_t i = 0; i < n_tracts; ++i) {
            CensusTract& t = world.tracts[i];
            t.population = 1000 + pop_rng.uniform_int(0, 4000);
            switch (cfg.demographics) {
                case DemographicMode::uniform:
                    t.pct_minority = 0.3;
                    t.pct_below_poverty200 = 0.25;
                    break;
                case DemographicMode::independent:
                    t.pct_minority = 0.05 + 0.85 * demo_rng.uniform01();
                    t.pct_below_poverty200 = 0.05 + 0.55 * demo_rng.uniform01();
                    break;
                case DemographicMode::planted: {
                    const double q = proximity[i];
                    t.pct_minority = clamp01(0.1 + 0.75 * q + 0.03 * demo_rng.normal());
                    t.pct_below_poverty200 = clamp01(0.1 + 0.45 * q + 0.03 * demo_rng.normal());
                    break;
                }
            }
        }
    }

    // ---- mobility ----
    const auto positions = cell_centers(n);
    std::unordered_map<std::size_t, std::vector<double>> cdf_cache;
    auto cdf_for = [&](std::size_t home) -> const std::vector<double>& {
        auto it = cdf_cache.find(home);
        if (it != cdf_cache.end()) return it->second;
        auto p = visit_probabilities(positions, home, cfg.decay_alpha);
        std::partial_sum(p.begin(), p.end(), p.begin());
        return cdf_cache.emplace(home, std::move(p)).first->second;
    };

    world.stops.reserve(static_cast<std::size_t>(cfg.users) * static_cast<std::size_t>(cfg.stops_per_user));
    const int width = std::max(6, static_cast<int>(std::to_string(cfg.users).size()));
    for (int u = 0; u < cfg.users; ++u) {
        Rng rng = Rng::stream(cfg.seed, "user", static_cast<std::uint64_t>(u));
        std::string id = std::to_string(u);
        id = "u" + std::string(static_cast<std::size_t>(width) - std::min(id.size(), static_cast<std::size_t>(width)), '0') + id;
        const auto home = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n_tracts) - 1));
        world.planted_homes.emplace(id, world.tracts[home].geoid);
        const auto& cdf = cdf_for(home);

        for (int j = 0; j < cfg.stops_per_user; ++j) {
            const Timestamp day_start = kWorldEpoch + static_cast<Timestamp>((j / 4) % kWorldDays) * 86400;
            std::size_t dest = home;
            StopRecord s;
            s.user_id = id;
            if (is_night_stop(j)) {
                s.start_ts = day_start + 22 * 3600 + rng.uniform_int(0, 1799);
                s.dwell_s = rng.uniform_int(kNightDwellMin, kNightDwellMax);
            } else {
                s.start_ts = day_start + 8 * 3600 + rng.uniform_int(0, 36000 - 1);
                s.dwell_s = rng.uniform_int(kDayDwellMin, kDayDwellMax);
                const double x = rng.uniform01() * cdf.back();
                dest = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
                dest = std::min(dest, n_tracts - 1);
            }
            const int r = static_cast<int>(dest) / n;
            const int c = static_cast<int>(dest) % n;
            s.lon = from_micro(lon0 + c * side + rng.uniform_int(1, side - 1));
            s.lat = from_micro(lat0 + r * side + rng.uniform_int(1, side - 1));
            world.stops.push_back(std::move(s));
        }
    }
    return world;
}

PlantedTruth planted_truth(const World& world)
{
    HazardMasks masks;
    masks[0] = classify_percentile(world.hazards[0], kDefaultPercentileThreshold);
    masks[1] = classify_percentile(world.hazards[1], kDefaultPercentileThreshold);
    masks[2] = classify_heat_quartile(world.hazards[2], world.tracts).layer;
    return planted_truth(world, masks);
}

PlantedTruth planted_truth(const World& world, const HazardMasks& masks)
{
    PlantedTruth truth;
    truth.homes = world.planted_homes;
    truth.masks = masks;
    const auto positions = cell_centers(world.config.grid_n);
    PerHazard<std::vector<char>> high;
    for (std::size_t h = 0; h < kHazardCount; ++h) {
        high[h].resize(world.tracts.size());
        for (std::size_t i = 0; i < world.tracts.size(); ++i) high[h][i] = masks[h].is_high(world.tracts[i].geoid);
    }
    const double w = night_dwell_share(world.config.stops_per_user);
    for (std::size_t i = 0; i < world.tracts.size(); ++i) {
        const auto p = visit_probabilities(positions, i, world.config.decay_alpha);
        PerHazard<double> e{};
        for (std::size_t h = 0; h < kHazardCount; ++h) {
            double day_hazard = 0.0;
            for (std::size_t g = 0; g < p.size(); ++g) {
                if (high[h][g]) day_hazard += p[g];
            }
            e[h] = w * (high[h][i] ? 1.0 : 0.0) + (1.0 - w) * day_hazard;
        }
        truth.expected_mei.emplace(world.tracts[i].geoid, e);
        if (!world.archetypes.empty()) truth.archetype.emplace(world.tracts[i].geoid, world.archetypes[i]);
    }
    return truth;
}

double neighbor_mask_agreement(const World& world, const HazardLayer& mask)
{
    const int n = world.config.grid_n;
    std::size_t pairs = 0, agree = 0;
    auto flag = [&](int r, int c) { return mask.is_high(world.tracts[static_cast<std::size_t>(r * n + c)].geoid); };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (c + 1 < n) {
                ++pairs;
                agree += flag(r, c) == flag(r, c + 1);
            }
            if (r + 1 < n) {
                ++pairs;
                agree += flag(r, c) == flag(r + 1, c);
            }
        }
    }
    return pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
}

void write_world(const World& world, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw OutputError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("stops.csv");
        write_stops(out, world.stops);
    }
    {
        auto out = open("tracts.geojson");
        write_tracts(out, world.tracts);
    }
    for (HazardType h : kHazards) {
        const std::string name = "hazard_" + std::string(short_name(h)) + ".csv";
        auto out = open(name.c_str());
        write_hazard(out, world.hazards[index_of(h)]);
    }
    {
        auto out = open("truth_homes.csv");
        out << "user_id,geoid\n";
        for (const auto& [u, g] : world.planted_homes) out << u << ',' << g << '\n';
    }
    {
        const PlantedTruth truth = planted_truth(world);
        auto out = open("truth_mei.csv");
        out << "geoid,expected_mei_air,expected_mei_toxic,expected_mei_heat,archetype\n";
        for (const auto& [g, e] : truth.expected_mei) {
            out << g << ',' << format_fixed6(e[0]) << ',' << format_fixed6(e[1]) << ',' << format_fixed6(e[2]) << ',';
            if (auto it = truth.archetype.find(g); it != truth.archetype.end()) out << it->second;
            out << '\n';
        }
    }
}

}  // namespace mei
