#pragma once
// End-to-end run: ingest, locate, infer homes, classify hazards, accumulate
// exposure, cluster, test, write reports.
//
// Config files are plain `key = value` lines; `#` starts a comment. Relative
// paths resolve against the config file's directory. Keys:
//
//   input_dir           sets stops/tracts/hazard_* to the standard file names in it
//   stops, tracts, hazard_air, hazard_toxic, hazard_heat
//   air_threshold, toxic_threshold     percentile cutoffs (default 0.5)
//   heat_quartile       true: per-county top quartile; false: heat_min_days
//   heat_min_days
//   night_start, night_end, min_nights
//   eps, min_pts        DBSCAN
//   curve_thresholds    comma-separated, ascending
//   compound_threshold
//   ttest               welch | pooled
//   cell_size           spatial index cell in degrees
//   outdir, threads

#include "mei/cluster.hpp"
#include "mei/exposure.hpp"
#include "mei/homeloc.hpp"
#include "mei/io.hpp"
#include "mei/stats.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mei {

struct AnalysisOptions {
    double air_threshold = 0.5;
    double toxic_threshold = 0.5;
    bool heat_quartile = true;
    double heat_min_days = 30.0;
    HomeParams home;
    ClusterConfig cluster;
    std::vector<double> curve_thresholds = default_curve_thresholds();
    double compound_threshold = 0.05;
    TTestVariant ttest = TTestVariant::welch;
    double cell_size_deg = kDefaultCellSizeDeg;

    /// 0, 0.05, ..., 0.5
    static std::vector<double> default_curve_thresholds();
};

struct RunConfig {
    std::filesystem::path stops;
    std::filesystem::path tracts;
    PerHazard<std::filesystem::path> hazards;
    std::filesystem::path outdir;
    unsigned threads = 1;
    AnalysisOptions analysis;
};

/// MEI_THREADS if set to a positive integer, else the hardware concurrency.
unsigned default_thread_count();

RunConfig default_run_config();

/// Applies one setting; throws ConfigError on unknown keys or bad values.
/// Relative paths are resolved against `base`.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base = {});

/// Reads a key = value file into `cfg`.
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Parameter ranges and input file existence. Throws ConfigError.
void check_run_config(const RunConfig& cfg, bool need_outdir = true);

/// Canonical text of every setting that affects outputs (not outdir or threads).
std::string canonical_config(const RunConfig& cfg);

/// Hash of the canonical config and the bytes of every input file.
std::string config_hash(const RunConfig& cfg);

/// A fatal error tagged with the pipeline stage that raised it.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage))
    {
    }
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineInputs {
    std::vector<StopRecord> stops;
    std::vector<CensusTract> tracts;
    PerHazard<HazardLayer> hazards;
};

struct Analysis {
    HomeMap homes;
    HazardMasks masks;
    std::vector<std::string> warnings;
    Accumulation accumulation;
    MeiTable table;  // regions and cluster labels set
    ClusterResult clusters;
    std::vector<ClusterSummaryRow> cluster_summary;
    std::vector<DisparityCell> disparity;
    std::vector<HazardPairCorrelation> correlations;
    std::vector<PopulationCurve> curves;
    CompoundLatent compound;
    ClassSummaries classes;
};

/// Everything after ingest. Failures are rethrown as PipelineError naming the
/// stage; ConfigError passes through unchanged.
Analysis analyze(const PipelineInputs& inputs, const AnalysisOptions& opts, unsigned threads = 1);

/// Builds the masks used by `analyze`.
HazardMasks classify_hazards(const PerHazard<HazardLayer>& layers, std::span<const CensusTract> tracts,
                             const AnalysisOptions& opts, std::vector<std::string>* warnings = nullptr);

struct IngestResult {
    PipelineInputs inputs;
    IngestReport stops_report;
    PerHazard<IngestReport> hazard_reports;
};

/// Reads all input files; IngestError is rethrown as PipelineError("ingest").
IngestResult ingest_inputs(const RunConfig& cfg);

struct RunResult {
    std::string config_hash;
    std::vector<std::filesystem::path> files;  // reports, sidecars and run_meta.json
    nlohmann::json meta;
};

/// The full run. On failure every file this run created is removed before
/// the exception propagates.
RunResult run_pipeline(const RunConfig& cfg);

/// Parses the inputs without analysis; returns a JSON description of what was read.
nlohmann::json validate_inputs(const RunConfig& cfg);

}  // namespace mei
