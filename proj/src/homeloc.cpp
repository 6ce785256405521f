#include "mei/homeloc.hpp"

#include "mei/error.hpp"
#include "mei/parallel.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace mei {

namespace {

constexpr std::int64_t kDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct TractDwell {
    std::int64_t night_s = 0;
    std::int64_t total_s = 0;
};

}  // namespace

const std::string* HomeMap::home_of(const std::string& user) const
{
    auto it = assignments.find(user);
    return it == assignments.end() ? nullptr : &it->second;
}

void check_home_params(const HomeParams& p)
{
    if (p.night_start_hour < 0 || p.night_start_hour > 23 || p.night_end_hour < 0 || p.night_end_hour > 23) {
        throw ConfigError("night window hours must lie in [0, 23]");
    }
    if (p.night_start_hour == p.night_end_hour) throw ConfigError("night window is empty");
    if (p.min_nights < 1) throw ConfigError("min_nights must be at least 1");
}

std::map<std::int64_t, std::int64_t> nighttime_overlap(Timestamp start, std::int64_t dwell_s,
                                                       const HomeParams& p)
{
    std::map<std::int64_t, std::int64_t> out;
    if (dwell_s <= 0) return out;
    const Timestamp end = start + dwell_s;
    const std::int64_t open = p.night_start_hour * 3600;
    const std::int64_t close = p.night_end_hour * 3600 + (p.night_start_hour > p.night_end_hour ? kDay : 0);
    for (std::int64_t d = floor_div(start, kDay) - 1; d <= floor_div(end, kDay); ++d) {
        const Timestamp w0 = d * kDay + open;
        const Timestamp w1 = d * kDay + close;
        const Timestamp lo = std::max(start, w0);
        const Timestamp hi = std::min(end, w1);
        if (hi > lo) out[d] += hi - lo;
    }
    return out;
}

HomeMap infer_homes(std::span<const StopRecord> stops, const TractIndex& index, const HomeParams& params,
                    unsigned threads)
{
    const auto located = locate_all(index, stops, threads);
    return infer_homes(stops, located, index, params, threads);
}

HomeMap infer_homes(std::span<const StopRecord> stops, std::span<const std::optional<TractId>> located,
                    const TractIndex& index, const HomeParams& params, unsigned threads)
{
    check_home_params(params);
    if (located.size() != stops.size()) throw std::invalid_argument("located/stops size mismatch");

    std::unordered_map<std::string_view, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < stops.size(); ++i) by_user[stops[i].user_id].push_back(i);
    std::vector<std::string_view> users;
    users.reserve(by_user.size());
    for (const auto& [u, _] : by_user) users.push_back(u);
    std::sort(users.begin(), users.end());

    std::vector<std::optional<TractId>> homes(users.size());
    parallel_chunks(users.size(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t u = begin; u < end; ++u) {
            std::map<TractId, TractDwell> dwell;
            std::set<std::int64_t> nights;
            for (std::size_t i : by_user.at(users[u])) {
                if (!located[i]) continue;
                auto& td = dwell[*located[i]];
                td.total_s += stops[i].dwell_s;
                for (const auto& [night, secs] : nighttime_overlap(stops[i].start_ts, stops[i].dwell_s, params)) {
                    td.night_s += secs;
                    nights.insert(night);
                }
            }
            if (nights.size() < static_cast<std::size_t>(params.min_nights)) continue;
            std::optional<TractId> best;
            TractDwell best_dwell;
            // map iterates ids ascending, i.e. geoids ascending; strict > keeps the smaller geoid on ties
            for (const auto& [id, td] : dwell) {
                if (td.night_s <= 0) continue;
                if (!best || td.night_s > best_dwell.night_s ||
                    (td.night_s == best_dwell.night_s && td.total_s > best_dwell.total_s)) {
                    best = id;
                    best_dwell = td;
                }
            }
            homes[u] = best;
        }
    });

    HomeMap result;
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (homes[u]) {
            result.assignments.emplace(std::string(users[u]), index.geoid(*homes[u]));
        } else {
            result.unassigned.emplace_back(users[u]);
        }
    }
    return result;
}

}  // namespace mei
