#pragma once
// CSV layouts for the analysis outputs and the plain-text run summary.

#include "mei/cluster.hpp"
#include "mei/exposure.hpp"
#include "mei/io.hpp"
#include "mei/stats.hpp"

#include <span>
#include <string>
#include <vector>

namespace mei {

/// geoid,label. One row per tract in `geoids`; tracts that were not clustered
/// (some MEI undefined) get an empty label.
CsvTable clusters_csv(const ClusterResult& result, std::span<const std::string> geoids);

/// label,count,share,mean_mei_air,mean_mei_toxic,mean_mei_heat
CsvTable cluster_summary_csv(std::span<const ClusterSummaryRow> rows);

/// scope,class,indicator,n_class,n_all,class_mean,all_mean,class_mean_popweighted,
/// all_mean_popweighted,t,df,p,significant_01,note
CsvTable disparity_csv(std::span<const DisparityCell> cells);

/// hazard_a,hazard_b,n,r,p,significant_01,note
CsvTable correlations_csv(std::span<const HazardPairCorrelation> pairs);

/// hazard,threshold,population; hazards in canonical order, thresholds ascending.
CsvTable curves_csv(std::span<const PopulationCurve> curves);

/// Human-readable summary: tract counts and mean MEI per region class and
/// hazard, latent population above each threshold, compound latent tracts.
std::string render_summary(const MeiTable& table, std::span<const CensusTract> tracts,
                           std::span<const double> thresholds, double compound_threshold);

}  // namespace mei
