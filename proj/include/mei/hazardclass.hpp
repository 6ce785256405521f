#pragma once
// Raw hazard values -> binary high-hazard masks.

#include "mei/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace mei {

inline constexpr double kDefaultPercentileThreshold = 0.5;

/// mask[g] = values[g] > threshold. Air pollution and toxic layers only.
/// Throws ConfigError for a threshold outside [0, 1] or a heat layer.
HazardLayer classify_percentile(const HazardLayer& layer, double threshold = kDefaultPercentileThreshold);

/// Percentile by linear interpolation between order statistics at rank
/// p * (n + 1), clamped to the sample range. `sorted` must be ascending.
double interpolated_percentile(std::span<const double> sorted, double p);

struct HeatClassification {
    HazardLayer layer;
    std::vector<std::string> warnings;
};

/// Per county: mask[g] = value[g] >= the county's 75th percentile. Counties with
/// fewer than 4 valued tracts mask their maximum (ties included). Layer geoids
/// that match no tract are left unmasked and reported as warnings.
HeatClassification classify_heat_quartile(const HazardLayer& layer, std::span<const CensusTract> tracts);

/// mask[g] = value[g] >= min_days; used when per-county quartiles are disabled.
HazardLayer classify_heat_absolute(const HazardLayer& layer, double min_days);

}  // namespace mei
