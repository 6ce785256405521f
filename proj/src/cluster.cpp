#include "mei/cluster.hpp"

#include "mei/error.hpp"
#include "mei/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace mei {

void check_cluster_config(const ClusterConfig& cfg)
{
    if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) throw ConfigError("DBSCAN eps must be positive");
    if (cfg.min_pts < 1) throw ConfigError("DBSCAN min_pts must be at least 1");
}

std::map<std::string, int> ClusterResult::label_map() const
{
    std::map<std::string, int> m;
    for (std::size_t i = 0; i < geoids.size(); ++i) m.emplace(geoids[i], labels[i]);
    return m;
}

namespace {

double squared_distance(const MeiTriple& a, const MeiTriple& b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace

ClusterResult dbscan(std::vector<ClusterPoint> points, const ClusterConfig& cfg, unsigned threads)
{
    check_cluster_config(cfg);
    std::sort(points.begin(), points.end(),
              [](const ClusterPoint& a, const ClusterPoint& b) { return a.geoid < b.geoid; });

    const std::size_t n = points.size();
    ClusterResult result;
    result.geoids.reserve(n);
    for (const auto& p : points) result.geoids.push_back(p.geoid);
    result.labels.assign(n, kNoise);
    result.core.assign(n, false);
    if (n == 0) return result;

    // Brute-force neighborhoods; each list includes the point itself.
    const double eps2 = cfg.eps * cfg.eps;
    std::vector<std::vector<std::uint32_t>> neighbors(n);
    parallel_chunks(n, threads, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (squared_distance(points[i].x, points[j].x) <= eps2) {
                    neighbors[i].push_back(static_cast<std::uint32_t>(j));
                }
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        result.core[i] = neighbors[i].size() >= static_cast<std::size_t>(cfg.min_pts);
    }

    std::vector<bool> assigned(n, false);
    int next_label = 0;
    std::deque<std::uint32_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (assigned[i] || !result.core[i]) continue;
        const int label = next_label++;
        assigned[i] = true;
        result.labels[i] = label;
        frontier.push_back(static_cast<std::uint32_t>(i));
        while (!frontier.empty()) {
            const auto p = frontier.front();
            frontier.pop_front();
            for (auto q : neighbors[p]) {
                if (assigned[q]) continue;
                assigned[q] = true;
                result.labels[q] = label;
                if (result.core[q]) frontier.push_back(q);
            }
        }
    }
    result.cluster_count = next_label;
    return result;
}

std::vector<ClusterPoint> cluster_points(const MeiTable& table)
{
    std::vector<ClusterPoint> pts;
    for (const auto& row : table.rows) {
        if (!row.all_defined()) continue;
        pts.push_back({row.geoid, {*row.mei[0], *row.mei[1], *row.mei[2]}});
    }
    return pts;
}

void apply_labels(MeiTable& table, const ClusterResult& result)
{
    for (auto& row : table.rows) row.cluster_label = kNoise;
    for (std::size_t i = 0; i < result.geoids.size(); ++i) {
        if (auto* row = table.find(result.geoids[i])) row->cluster_label = result.labels[i];
    }
}

std::vector<ClusterSummaryRow> summarize(const ClusterResult& result, const MeiTable& table)
{
    std::map<int, ClusterSummaryRow> by_label;
    for (std::size_t i = 0; i < result.geoids.size(); ++i) {
        auto& row = by_label[result.labels[i]];
        row.label = result.labels[i];
        row.count += 1;
        if (const auto* mr = table.find(result.geoids[i]); mr && mr->all_defined()) {
            for (std::size_t h = 0; h < 3; ++h) row.mean_mei[h] += *mr->mei[h];
        }
    }
    std::vector<ClusterSummaryRow> rows;
    const auto total = static_cast<double>(result.geoids.size());
    for (auto& [_, row] : by_label) {
        for (auto& m : row.mean_mei) m /= static_cast<double>(row.count);
        row.share = static_cast<double>(row.count) / total;
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const ClusterSummaryRow& a, const ClusterSummaryRow& b) {
        return a.count != b.count ? a.count > b.count : a.label < b.label;
    });
    return rows;
}

}  // namespace mei
