#pragma once
// DBSCAN over per-tract MEI triples (air, toxic, heat), Euclidean metric.

#include "mei/model.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace mei {

struct ClusterConfig {
    double eps = 0.1;
    int min_pts = 10;
};

/// Throws ConfigError unless eps > 0 and min_pts >= 1.
void check_cluster_config(const ClusterConfig& cfg);

using MeiTriple = std::array<double, 3>;

struct ClusterPoint {
    std::string geoid;
    MeiTriple x{};
};

inline constexpr int kNoise = -1;

struct ClusterResult {
    /// Parallel arrays in geoid order.
    std::vector<std::string> geoids;
    std::vector<int> labels;
    std::vector<bool> core;
    int cluster_count = 0;

    std::map<std::string, int> label_map() const;
};

/// Classic DBSCAN. A point is core when at least min_pts points (itself
/// included) lie within eps. Points are scanned in geoid order; clusters are
/// numbered 0, 1, ... in order of discovery and a border point joins the first
/// cluster that reaches it. Neighbor lists are computed in parallel.
ClusterResult dbscan(std::vector<ClusterPoint> points, const ClusterConfig& cfg, unsigned threads = 1);

/// Tracts whose three MEI values are all defined.
std::vector<ClusterPoint> cluster_points(const MeiTable& table);

/// Writes labels back into the table (tracts not clustered get -1).
void apply_labels(MeiTable& table, const ClusterResult& result);

struct ClusterSummaryRow {
    int label = kNoise;
    std::size_t count = 0;
    double share = 0.0;
    MeiTriple mean_mei{};
};

/// One row per label, sorted by count descending then label ascending.
std::vector<ClusterSummaryRow> summarize(const ClusterResult& result, const MeiTable& table);

}  // namespace mei
