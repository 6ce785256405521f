#pragma once
// Home tract inference from nighttime dwell.
//
// A user's home is the tract holding the most nighttime dwell, where nighttime
// is [night_start, night_end) UTC, wrapping past midnight when night_start >
// night_end. Users with fewer than min_nights distinct nights of located
// nighttime dwell stay unassigned. Ties go to larger total dwell in the tract,
// then to the smaller geoid.

#include "mei/geoindex.hpp"
#include "mei/model.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mei {

struct HomeParams {
    int night_start_hour = 22;
    int night_end_hour = 6;
    int min_nights = 3;
};

struct HomeMap {
    std::map<std::string, std::string> assignments;  // user_id -> geoid
    std::vector<std::string> unassigned;              // sorted

    const std::string* home_of(const std::string& user) const;
};

/// Throws ConfigError for hours outside [0, 23], equal hours, or min_nights < 1.
void check_home_params(const HomeParams& p);

/// Seconds of [start, start + dwell) that fall into the night window, keyed by
/// the day on which each night begins (days since epoch).
std::map<std::int64_t, std::int64_t> nighttime_overlap(Timestamp start, std::int64_t dwell_s,
                                                       const HomeParams& p);

HomeMap infer_homes(std::span<const StopRecord> stops, const TractIndex& index,
                    const HomeParams& params = {}, unsigned threads = 1);

/// Same, with stop locations already resolved (one entry per stop).
HomeMap infer_homes(std::span<const StopRecord> stops, std::span<const std::optional<TractId>> located,
                    const TractIndex& index, const HomeParams& params = {}, unsigned threads = 1);

}  // namespace mei
